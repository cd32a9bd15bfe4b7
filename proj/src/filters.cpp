#include "requery/filters.hpp"

#include "requery/errors.hpp"
#include "requery/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <unordered_set>

namespace requery {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Semicolon-separated names; whitespace and trailing periods are noise the
// model adds erratically.
std::vector<std::string> split_name_list(const std::string& response) {
    std::vector<std::string> names;
    std::size_t begin = 0;
    while (begin <= response.size()) {
        std::size_t end = response.find(';', begin);
        if (end == std::string::npos) end = response.size();
        std::string name = trim(response.substr(begin, end - begin));
        while (!name.empty() && name.back() == '.') name.pop_back();
        name = trim(name);
        if (!name.empty()) names.push_back(name);
        begin = end + 1;
    }
    return names;
}

bool is_no_tables_sentinel(const std::string& response) {
    std::string cleaned = trim(response);
    while (!cleaned.empty() && (cleaned.back() == '.' || cleaned.back() == '\'' ||
                                cleaned.back() == '"'))
        cleaned.pop_back();
    while (!cleaned.empty() && (cleaned.front() == '\'' || cleaned.front() == '"'))
        cleaned.erase(cleaned.begin());
    return lower(trim(cleaned)) == "no tables usable";
}

// Catalog-ordered selection of the accepted names.
std::vector<std::string> in_catalog_order(const Catalog& catalog,
                                          const std::unordered_set<std::string>& accepted_lower) {
    std::vector<std::string> out;
    for (const std::string& name : catalog.table_names())
        if (accepted_lower.count(lower(name))) out.push_back(name);
    return out;
}

} // namespace

FilterResult embedding_filter(const Catalog& catalog, const QueryAnalysis& query_analysis,
                              const VectorStore& store, const FilterConfig& cfg) {
    if (!query_analysis.parse_ok)
        throw Error("embedding filter needs a parseable query: " + query_analysis.parse_error);

    std::vector<NameEmbedding> query_embeddings;
    for (const std::string& table : query_analysis.referenced_tables)
        query_embeddings.push_back(store.embed_name(table));

    FilterResult result;
    for (const std::string& name : catalog.table_names()) {
        NameEmbedding candidate = store.embed_name(name);
        double best = 0.0;
        for (const NameEmbedding& q : query_embeddings)
            best = std::max(best, cosine(candidate, q));
        if (best >= cfg.epsilon) result.relevant_tables.push_back(name);
    }
    return result;
}

std::vector<std::vector<std::string>> partition_packages(const std::vector<std::string>& names,
                                                         const std::string& query,
                                                         const LlmModelSpec& spec,
                                                         const FilterConfig& cfg) {
    const std::string empty_template = prompts::render_simple_filter("", "");
    const std::int64_t overhead = estimate_tokens(empty_template) + estimate_tokens(query);

    auto fits = [&](std::int64_t name_tokens) {
        bool within_context =
            overhead + name_tokens + spec.max_output_tokens <= spec.context_window;
        bool within_output =
            static_cast<double>(name_tokens) * cfg.expected_return_fraction <=
            static_cast<double>(spec.max_output_tokens);
        return within_context && within_output;
    };

    std::vector<std::vector<std::string>> packages;
    std::vector<std::string> current;
    std::int64_t current_tokens = 0;
    for (const std::string& name : names) {
        const std::int64_t tokens = estimate_tokens(name);
        if (!fits(tokens))
            throw PackagingError("table name '" + name + "' alone exceeds the package budget");
        if (!current.empty() && !fits(current_tokens + tokens)) {
            packages.push_back(std::move(current));
            current.clear();
            current_tokens = 0;
        }
        current.push_back(name);
        current_tokens += tokens;
    }
    if (!current.empty()) packages.push_back(std::move(current));
    return packages;
}

FilterResult simple_llm_filter(const Catalog& catalog, const std::string& query, LlmGateway& gate,
                               const LlmModelSpec& spec, const FilterConfig& cfg) {
    FilterResult result;
    std::unordered_set<std::string> accepted;
    auto packages = partition_packages(catalog.table_names(), query, spec, cfg);
    for (const std::vector<std::string>& package : packages) {
        std::string name_list;
        for (std::size_t i = 0; i < package.size(); ++i) {
            if (i) name_list += "; ";
            name_list += package[i];
        }
        LlmExchange exchange = gate.complete(spec, prompts::render_simple_filter(query, name_list));
        result.exchanges.push_back(exchange);
        if (is_no_tables_sentinel(exchange.response)) continue;

        bool any_known = false;
        for (const std::string& name : split_name_list(exchange.response)) {
            if (catalog.contains(name)) {
                accepted.insert(lower(name));
                any_known = true;
            } else {
                std::cerr << "[filter] dropping suggested table not in catalog: " << name << "\n";
            }
        }
        if (!any_known)
            std::cerr << "[filter] package response contained no usable table names\n";
    }
    result.relevant_tables = in_catalog_order(catalog, accepted);
    return result;
}

std::vector<std::string> match_suggestions(const Catalog& catalog,
                                           const std::vector<std::string>& suggestions,
                                           const VectorStore& store, double gamma) {
    std::vector<NameEmbedding> suggestion_embeddings;
    for (const std::string& s : suggestions) suggestion_embeddings.push_back(store.embed_name(s));

    std::vector<std::string> out;
    for (const std::string& name : catalog.table_names()) {
        NameEmbedding candidate = store.embed_name(name);
        double best = 0.0;
        for (const NameEmbedding& s : suggestion_embeddings)
            best = std::max(best, cosine(candidate, s));
        if (best >= gamma) out.push_back(name);
    }
    return out;
}

FilterResult complex_llm_filter(const Catalog& catalog, const std::string& query, LlmGateway& gate,
                                const LlmModelSpec& spec, const VectorStore& store,
                                const FilterConfig& cfg) {
    FilterResult result;
    LlmExchange exchange = gate.complete(spec, prompts::render_complex_filter(query));
    result.exchanges.push_back(exchange);

    std::vector<std::string> suggestions = split_name_list(exchange.response);
    if (suggestions.empty()) {
        std::cerr << "[filter] complex filter returned no table suggestions\n";
        return result;
    }
    result.relevant_tables = match_suggestions(catalog, suggestions, store, cfg.gamma);
    return result;
}

} // namespace requery
