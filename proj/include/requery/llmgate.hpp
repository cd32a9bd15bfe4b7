#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace requery {

struct LlmModelSpec {
    std::string model_name = "gpt-4o-2024-08-06";
    std::int64_t context_window = 128000;
    std::int64_t max_output_tokens = 16384;
    double input_price_per_1m = 2.50;
    double output_price_per_1m = 10.00;
};

enum class LlmBackend { live, replay };

struct LlmExchange {
    std::string prompt;
    std::string response;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    LlmBackend backend = LlmBackend::live;
    std::string prompt_digest;
};

struct CostReport {
    std::int64_t total_input_tokens = 0;
    std::int64_t total_output_tokens = 0;
    double total_cost_dollars = 0.0;
};

// Deterministic upper-bound heuristic: ceil(utf8 bytes / 4). Used for
// batching and budget checks only; billing uses provider-reported usage.
std::int64_t estimate_tokens(const std::string& text);

// Stable hash of (model_name, prompt), hex encoded.
std::string prompt_digest(const std::string& model_name, const std::string& prompt);

CostReport accumulate_cost(const LlmModelSpec& spec, const std::vector<LlmExchange>& exchanges);

// What a transport returns for one completion request.
struct LlmReply {
    std::string text;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

// A transport performs one completion request. The stock implementation
// speaks OpenAI-style chat completions over HTTP; tests inject scripted ones.
using LlmTransport = std::function<LlmReply(const LlmModelSpec&, const std::string& prompt)>;

// Chat-completion transport against `endpoint` (full URL). Sends
// {"model":..., "messages":[{"role":"user","content":prompt}]} and reads
// choices[0].message.content plus usage. Retries once on failure.
LlmTransport http_transport(const std::string& endpoint, const std::string& api_key);

// Reads LLM_ENDPOINT and LLM_API_KEY from the environment.
LlmTransport http_transport_from_env();

// Append-only store of prompt/response exchanges, one JSON object per line:
// {"digest","model","prompt","response","input_tokens","output_tokens"}.
// On load the first record for a digest wins.
class FixtureStore {
public:
    struct Record {
        std::string digest;
        std::string model;
        std::string prompt;
        std::string response;
        std::int64_t input_tokens = 0;
        std::int64_t output_tokens = 0;
    };

    explicit FixtureStore(std::filesystem::path path);

    static FixtureStore open(const std::filesystem::path& path); // loads existing records
    void append(const Record& record);                           // serialized, flushed per record

    const Record* find(const std::string& digest) const;
    // For replay-miss diagnostics: stored prompt sharing the longest common
    // prefix with `prompt`, truncated to 80 chars.
    std::string nearest_prompt(const std::string& prompt) const;
    std::size_t size() const { return order_.size(); }

private:
    std::filesystem::path path_;
    std::vector<std::string> order_;
    std::unordered_map<std::string, Record> records_;
    std::mutex append_mutex_;
};

// Single gateway for all LLM traffic. Modes:
//   live:   transport call per request
//   record: transport call, then append the exchange to the fixture store
//   replay: fixture lookup only; no transport, no network
class LlmGateway {
public:
    static LlmGateway live(LlmTransport transport);
    static LlmGateway record(const std::filesystem::path& fixture_path, LlmTransport transport);
    static LlmGateway replay(const std::filesystem::path& fixture_path);

    LlmExchange complete(const LlmModelSpec& spec, const std::string& prompt);

    // Every exchange issued through this gateway, in call order.
    std::vector<LlmExchange> log() const;
    std::size_t call_count() const;

private:
    LlmGateway() = default;

    struct LogState {
        mutable std::mutex mutex;
        std::vector<LlmExchange> entries;
    };

    LlmTransport transport_;              // empty in replay mode
    std::shared_ptr<FixtureStore> store_; // null in live mode
    bool replay_ = false;
    std::shared_ptr<LogState> log_state_ = std::make_shared<LogState>();
};

} // namespace requery
