#pragma once

#include <string>
#include <vector>

#include "requery/catalog.hpp"
#include "requery/embedkit.hpp"
#include "requery/llmgate.hpp"
#include "requery/sqlkit.hpp"

namespace requery {

enum class FilterStrategy { embedding, simple_llm, complex_llm };

struct FilterConfig {
    FilterStrategy strategy = FilterStrategy::complex_llm;
    double epsilon = 0.4;                 // embedding filter cosine threshold
    double gamma = 0.7;                   // complex filter cosine threshold
    double expected_return_fraction = 0.5; // of package names assumed relevant
};

struct FilterResult {
    std::vector<std::string> relevant_tables; // catalog order, no duplicates
    std::vector<LlmExchange> exchanges;       // empty for the embedding strategy
};

// A table passes when the cosine similarity of its name embedding to any
// table referenced in the query reaches epsilon. Requires a parsed query;
// makes no LLM calls.
FilterResult embedding_filter(const Catalog& catalog, const QueryAnalysis& query_analysis,
                              const VectorStore& store, const FilterConfig& cfg);

// Greedy packing of table names in input order. A package is capped so that
//   template tokens + query tokens + sum(name tokens) + max_output_tokens <= context_window
// and
//   sum(name tokens) * expected_return_fraction <= max_output_tokens.
// Throws PackagingError when a single name alone violates a budget.
std::vector<std::vector<std::string>> partition_packages(const std::vector<std::string>& names,
                                                         const std::string& query,
                                                         const LlmModelSpec& spec,
                                                         const FilterConfig& cfg);

// One LLM call per package with the full name list; the response is either
// the "No tables usable" sentinel or a semicolon-separated list of names.
// Names absent from the catalog are dropped.
FilterResult simple_llm_filter(const Catalog& catalog, const std::string& query, LlmGateway& gate,
                               const LlmModelSpec& spec, const FilterConfig& cfg);

// Matching half of the complex filter: a catalog table passes when the
// cosine of its embedding to any suggested name reaches gamma.
std::vector<std::string> match_suggestions(const Catalog& catalog,
                                           const std::vector<std::string>& suggestions,
                                           const VectorStore& store, double gamma);

// One LLM call asking for ideal table names without showing the catalog,
// then embedding-matches the suggestions against the catalog at gamma.
FilterResult complex_llm_filter(const Catalog& catalog, const std::string& query, LlmGateway& gate,
                                const LlmModelSpec& spec, const VectorStore& store,
                                const FilterConfig& cfg);

} // namespace requery
