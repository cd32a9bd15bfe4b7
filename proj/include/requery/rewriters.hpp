#pragma once

#include <string>
#include <vector>

#include "requery/catalog.hpp"
#include "requery/llmgate.hpp"

namespace requery {

enum class RewriteOrigin { simple, nl };

enum class CandidateState { raw, pruned, kept, corrected, uncorrectable };

struct RewriteCandidate {
    std::string sql;
    RewriteOrigin origin = RewriteOrigin::simple;
    int batch_index = 0; // position in the LLM response
    CandidateState state = CandidateState::raw;
};

struct RewriteRequest {
    std::string original_query;
    std::vector<std::string> allowed_tables; // non-empty; prefixed names
    int n = 5;
};

// Split an LLM rewrite response into SQL fragments: code fences and prose
// are stripped, fragments split on ";" and deduplicated downstream.
std::vector<std::string> parse_rewrite_response(const std::string& response);

// Whitespace-collapsed, case-folded outside string literals; the key used to
// deduplicate candidates across the retry union.
std::string normalize_sql(const std::string& sql);

// Single prompt carrying the query, the serialized allowed tables and n.
// Retries the identical prompt once when fewer than n candidates parse;
// returns up to n candidates (possibly fewer, with a warning on stderr).
std::vector<RewriteCandidate> simple_rewrite(const RewriteRequest& req, const Catalog& catalog,
                                             LlmGateway& gate, const LlmModelSpec& spec);

// One LLM call describing the information need behind the query without
// naming tables or columns. Empty responses are an error.
std::string extract_intent(const std::string& query, LlmGateway& gate, const LlmModelSpec& spec);

// Two-step strategy: extract_intent, then the rewrite prompt with the intent
// text in place of the SQL query. Candidates are tagged origin=nl.
std::vector<RewriteCandidate> nl_rewrite(const RewriteRequest& req, const Catalog& catalog,
                                         LlmGateway& gate, const LlmModelSpec& spec);

} // namespace requery
