#include "requery/llmgate.hpp"

#include "requery/errors.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

// SSL support is optional; plain-HTTP endpoints (local proxies, stubs) work
// without it.
#ifdef REQUERY_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace requery {

using nlohmann::json;

std::int64_t estimate_tokens(const std::string& text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::string prompt_digest(const std::string& model_name, const std::string& prompt) {
    // FNV-1a, 64 bit, over model \x1f prompt
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    mix(model_name);
    h ^= 0x1f;
    h *= 1099511628211ull;
    mix(prompt);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CostReport accumulate_cost(const LlmModelSpec& spec, const std::vector<LlmExchange>& exchanges) {
    CostReport report;
    for (const LlmExchange& e : exchanges) {
        report.total_input_tokens += e.input_tokens;
        report.total_output_tokens += e.output_tokens;
    }
    report.total_cost_dollars =
        static_cast<double>(report.total_input_tokens) * spec.input_price_per_1m / 1e6 +
        static_cast<double>(report.total_output_tokens) * spec.output_price_per_1m / 1e6;
    return report;
}

namespace {

struct UrlParts {
    std::string base; // scheme://host[:port]
    std::string path;
};

UrlParts split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw LlmError("malformed endpoint URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

LlmReply post_chat_completion(const std::string& endpoint, const std::string& api_key,
                              const LlmModelSpec& spec, const std::string& prompt) {
    UrlParts url = split_url(endpoint);
    json body = {
        {"model", spec.model_name},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
    };

    httplib::Client client(url.base);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) { // one retry on failure
        auto res = client.Post(url.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            continue;
        }
        try {
            json reply = json::parse(res->body);
            LlmReply out;
            out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            if (reply.contains("usage")) {
                out.input_tokens = reply["usage"].value("prompt_tokens", 0);
                out.output_tokens = reply["usage"].value("completion_tokens", 0);
            }
            return out;
        } catch (const json::exception& e) {
            last_error = std::string("malformed completion response: ") + e.what();
        }
    }
    throw LlmError("chat completion failed after retry: " + last_error);
}

} // namespace

LlmTransport http_transport(const std::string& endpoint, const std::string& api_key) {
    return [endpoint, api_key](const LlmModelSpec& spec, const std::string& prompt) {
        return post_chat_completion(endpoint, api_key, spec, prompt);
    };
}

LlmTransport http_transport_from_env() {
    const char* endpoint = std::getenv("LLM_ENDPOINT");
    if (!endpoint || !*endpoint)
        throw LlmError("LLM_ENDPOINT is not set; live mode needs an endpoint URL");
    const char* key = std::getenv("LLM_API_KEY");
    return http_transport(endpoint, key ? key : "");
}

// ---------------------------------------------------------------------------
// FixtureStore

FixtureStore::FixtureStore(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return; // fresh store
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw LlmError(path_.string() + ":" + std::to_string(line_no) +
                           ": malformed fixture record: " + e.what());
        }
        Record rec;
        rec.digest = j.value("digest", "");
        rec.model = j.value("model", "");
        rec.prompt = j.value("prompt", "");
        rec.response = j.value("response", "");
        rec.input_tokens = j.value("input_tokens", 0);
        rec.output_tokens = j.value("output_tokens", 0);
        if (rec.digest.empty())
            throw LlmError(path_.string() + ":" + std::to_string(line_no) +
                           ": fixture record without digest");
        if (records_.count(rec.digest)) continue; // first record wins
        order_.push_back(rec.digest);
        records_.emplace(rec.digest, std::move(rec));
    }
}

FixtureStore FixtureStore::open(const std::filesystem::path& path) { return FixtureStore(path); }

void FixtureStore::append(const Record& record) {
    std::lock_guard<std::mutex> lock(append_mutex_);
    if (records_.count(record.digest)) return; // one record per digest
    std::ofstream out(path_, std::ios::app);
    if (!out) throw LlmError("cannot open fixture store for append: " + path_.string());
    json j = {{"digest", record.digest},
              {"model", record.model},
              {"prompt", record.prompt},
              {"response", record.response},
              {"input_tokens", record.input_tokens},
              {"output_tokens", record.output_tokens}};
    out << j.dump() << "\n";
    out.flush();
    order_.push_back(record.digest);
    records_.emplace(record.digest, record);
}

const FixtureStore::Record* FixtureStore::find(const std::string& digest) const {
    auto it = records_.find(digest);
    return it == records_.end() ? nullptr : &it->second;
}

std::string FixtureStore::nearest_prompt(const std::string& prompt) const {
    std::size_t best_len = 0;
    const Record* best = nullptr;
    for (const std::string& digest : order_) {
        const Record& rec = records_.at(digest);
        std::size_t common = 0;
        const std::size_t limit = std::min(prompt.size(), rec.prompt.size());
        while (common < limit && prompt[common] == rec.prompt[common]) ++common;
        if (!best || common > best_len) {
            best = &rec;
            best_len = common;
        }
    }
    if (!best) return "<empty store>";
    return best->prompt.substr(0, 80);
}

// ---------------------------------------------------------------------------
// LlmGateway

LlmGateway LlmGateway::live(LlmTransport transport) {
    LlmGateway g;
    g.transport_ = std::move(transport);
    return g;
}

LlmGateway LlmGateway::record(const std::filesystem::path& fixture_path, LlmTransport transport) {
    LlmGateway g;
    g.transport_ = std::move(transport);
    g.store_ = std::make_shared<FixtureStore>(fixture_path);
    return g;
}

LlmGateway LlmGateway::replay(const std::filesystem::path& fixture_path) {
    LlmGateway g;
    g.replay_ = true;
    g.store_ = std::make_shared<FixtureStore>(fixture_path);
    return g;
}

LlmExchange LlmGateway::complete(const LlmModelSpec& spec, const std::string& prompt) {
    if (estimate_tokens(prompt) + spec.max_output_tokens > spec.context_window)
        throw LlmError("prompt of ~" + std::to_string(estimate_tokens(prompt)) +
                       " tokens plus max output " + std::to_string(spec.max_output_tokens) +
                       " exceeds the context window of " + std::to_string(spec.context_window));

    LlmExchange exchange;
    exchange.prompt = prompt;
    exchange.prompt_digest = prompt_digest(spec.model_name, prompt);

    if (replay_) {
        const FixtureStore::Record* rec = store_->find(exchange.prompt_digest);
        if (!rec)
            throw ReplayMissError("replay miss for digest " + exchange.prompt_digest +
                                      "; nearest stored prompt: \"" + store_->nearest_prompt(prompt) +
                                      "\"",
                                  exchange.prompt_digest);
        exchange.response = rec->response;
        exchange.input_tokens = rec->input_tokens;
        exchange.output_tokens = rec->output_tokens;
        exchange.backend = LlmBackend::replay;
    } else {
        LlmReply reply = transport_(spec, prompt);
        exchange.response = reply.text;
        exchange.input_tokens = reply.input_tokens;
        exchange.output_tokens = reply.output_tokens;
        exchange.backend = LlmBackend::live;
        if (store_) {
            FixtureStore::Record rec;
            rec.digest = exchange.prompt_digest;
            rec.model = spec.model_name;
            rec.prompt = prompt;
            rec.response = exchange.response;
            rec.input_tokens = exchange.input_tokens;
            rec.output_tokens = exchange.output_tokens;
            store_->append(rec);
        }
    }

    {
        std::lock_guard<std::mutex> lock(log_state_->mutex);
        log_state_->entries.push_back(exchange);
    }
    return exchange;
}

std::vector<LlmExchange> LlmGateway::log() const {
    std::lock_guard<std::mutex> lock(log_state_->mutex);
    return log_state_->entries;
}

std::size_t LlmGateway::call_count() const {
    std::lock_guard<std::mutex> lock(log_state_->mutex);
    return log_state_->entries.size();
}

} // namespace requery
