#pragma once

#include <string>
#include <vector>

namespace requery::prompts {

// Template bytes are frozen: recorded fixtures are only valid for the
// template version they were produced with. Bump on any wording change.
extern const char* const kPromptVersion;

extern const char* const kSimpleFilterTemplate;    // {query}, {name_list}
extern const char* const kComplexFilterTemplate;   // {query}
extern const char* const kSimpleRewriteTemplate;   // {query}, {filtered_tables}, {n}
extern const char* const kNlRewriteTemplate;       // {intent}, {filtered_tables}, {n}
extern const char* const kIntentTemplate;          // {query}
extern const char* const kSimilarityTemplate;      // {input_query}, {alternative_queries}
extern const char* const kCorrectionTemplate;      // {sql}, {tables}, {error_message}

// Replaces every "{key}" occurrence; keys not present in `values` are left as-is.
std::string render(const std::string& tmpl,
                   const std::vector<std::pair<std::string, std::string>>& values);

std::string render_simple_filter(const std::string& query, const std::string& name_list);
std::string render_complex_filter(const std::string& query);
std::string render_simple_rewrite(const std::string& query, const std::string& filtered_tables, int n);
std::string render_nl_rewrite(const std::string& intent, const std::string& filtered_tables, int n);
std::string render_intent(const std::string& query);
std::string render_similarity(const std::string& input_query, const std::string& alternative_queries);
std::string render_correction(const std::string& sql, const std::string& tables,
                              const std::string& error_message);

} // namespace requery::prompts
