#include "requery/rewriters.hpp"

#include "requery/errors.hpp"
#include "requery/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <sstream>
#include <unordered_set>

namespace requery {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

bool is_word_boundary(const std::string& s, std::size_t pos, std::size_t len) {
    auto is_ident = [&](std::size_t i) {
        return std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_';
    };
    if (pos > 0 && is_ident(pos - 1)) return false;
    if (pos + len < s.size() && is_ident(pos + len)) return false;
    return true;
}

std::size_t find_word_ci(const std::string& haystack, const std::string& needle_lower,
                         std::size_t from = 0) {
    for (std::size_t i = from; i + needle_lower.size() <= haystack.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < needle_lower.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(haystack[i + k])) != needle_lower[k]) {
                match = false;
                break;
            }
        }
        if (match && is_word_boundary(haystack, i, needle_lower.size())) return i;
    }
    return std::string::npos;
}

// Start of the SQL inside a fragment that may carry leading prose: the first
// SELECT, or a WITH that opens a line.
std::size_t sql_anchor(const std::string& fragment) {
    std::size_t select_pos = find_word_ci(fragment, "select");
    std::size_t with_pos = std::string::npos;
    std::size_t search = 0;
    while (true) {
        std::size_t pos = find_word_ci(fragment, "with", search);
        if (pos == std::string::npos) break;
        std::size_t line_start = fragment.rfind('\n', pos);
        line_start = line_start == std::string::npos ? 0 : line_start + 1;
        bool only_space = true;
        for (std::size_t i = line_start; i < pos; ++i)
            if (!std::isspace(static_cast<unsigned char>(fragment[i]))) only_space = false;
        if (only_space) {
            with_pos = pos;
            break;
        }
        search = pos + 4;
    }
    return std::min(select_pos, with_pos);
}

std::string strip_code_fences(const std::string& response) {
    std::istringstream in(response);
    std::string out, line;
    while (std::getline(in, line)) {
        if (trim(line).rfind("```", 0) == 0) continue;
        out += line;
        out += "\n";
    }
    return out;
}

} // namespace

std::vector<std::string> parse_rewrite_response(const std::string& response) {
    std::string cleaned = strip_code_fences(response);
    std::vector<std::string> fragments;
    std::size_t begin = 0;
    while (begin <= cleaned.size()) {
        std::size_t end = cleaned.find(';', begin);
        if (end == std::string::npos) end = cleaned.size();
        fragments.push_back(cleaned.substr(begin, end - begin));
        begin = end + 1;
    }

    std::vector<std::string> queries;
    for (const std::string& fragment : fragments) {
        std::size_t anchor = sql_anchor(fragment);
        if (anchor == std::string::npos) continue; // prose-only fragment
        std::string sql = trim(fragment.substr(anchor));
        if (!sql.empty()) queries.push_back(std::move(sql));
    }
    return queries;
}

std::string normalize_sql(const std::string& sql) {
    std::string out;
    bool in_string = false;
    bool pending_space = false;
    for (std::size_t i = 0; i < sql.size(); ++i) {
        char c = sql[i];
        if (in_string) {
            out += c;
            if (c == '\'') in_string = false;
            continue;
        }
        if (c == '\'') {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            in_string = true;
            out += c;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out += ' ';
        pending_space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

namespace {

void validate(const RewriteRequest& req) {
    if (req.n < 1) throw Error("rewrite count must be at least 1");
    if (req.allowed_tables.empty()) throw Error("rewriting needs a non-empty table set");
}

std::vector<RewriteCandidate> run_rewrite(const RewriteRequest& req, const std::string& prompt,
                                          RewriteOrigin origin, LlmGateway& gate,
                                          const LlmModelSpec& spec) {
    std::vector<std::string> parsed = parse_rewrite_response(gate.complete(spec, prompt).response);
    if (static_cast<int>(parsed.size()) < req.n) {
        // one retry with the identical prompt, union deduplicated
        std::vector<std::string> more =
            parse_rewrite_response(gate.complete(spec, prompt).response);
        std::unordered_set<std::string> seen;
        for (const std::string& q : parsed) seen.insert(normalize_sql(q));
        for (const std::string& q : more) {
            if (seen.insert(normalize_sql(q)).second) parsed.push_back(q);
        }
    }
    if (parsed.empty()) {
        std::cerr << "[rewriter] no parseable rewrites after retry\n";
        return {};
    }
    if (static_cast<int>(parsed.size()) > req.n) parsed.resize(req.n);
    if (static_cast<int>(parsed.size()) < req.n)
        std::cerr << "[rewriter] requested " << req.n << " rewrites, parsed only " << parsed.size()
                  << "\n";

    std::vector<RewriteCandidate> candidates;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        RewriteCandidate c;
        c.sql = parsed[i];
        c.origin = origin;
        c.batch_index = static_cast<int>(i);
        c.state = CandidateState::raw;
        candidates.push_back(std::move(c));
    }
    return candidates;
}

} // namespace

std::vector<RewriteCandidate> simple_rewrite(const RewriteRequest& req, const Catalog& catalog,
                                             LlmGateway& gate, const LlmModelSpec& spec) {
    validate(req);
    std::string tables = serialize_for_prompt(catalog, req.allowed_tables);
    std::string prompt = prompts::render_simple_rewrite(req.original_query, tables, req.n);
    return run_rewrite(req, prompt, RewriteOrigin::simple, gate, spec);
}

std::string extract_intent(const std::string& query, LlmGateway& gate, const LlmModelSpec& spec) {
    LlmExchange exchange = gate.complete(spec, prompts::render_intent(query));
    std::string intent = trim(exchange.response);
    if (intent.empty()) throw LlmError("empty intent for query: " + query);
    return intent;
}

std::vector<RewriteCandidate> nl_rewrite(const RewriteRequest& req, const Catalog& catalog,
                                         LlmGateway& gate, const LlmModelSpec& spec) {
    validate(req);
    std::string intent = extract_intent(req.original_query, gate, spec);
    std::string tables = serialize_for_prompt(catalog, req.allowed_tables);
    std::string prompt = prompts::render_nl_rewrite(intent, tables, req.n);
    return run_rewrite(req, prompt, RewriteOrigin::nl, gate, spec);
}

} // namespace requery
