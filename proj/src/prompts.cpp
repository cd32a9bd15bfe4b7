#include "requery/prompts.hpp"

namespace requery::prompts {

// Changing any template invalidates recorded fixtures; bump the version and
// re-record when you do.
const char* const kPromptVersion = "v1";

const char* const kSimpleFilterTemplate =
    R"(I want you to decide which from the given tables are useful to answer a given query.
It is important that the chosen tables can help to answer the query either directly or indirectly.
If a table cannot be used directly, think about if it can be used due to it being correlated regarding human intuition.
E.g. tables on park locations and crime rates could help to know areas with high rent.
So, in conclusion, the tables should be usable to answer the query such that the information gain stays the same for a human.
Synonyms, hyponyms, correlations and similar topics should be important when choosing the usable tables.
I have the following SQL query:
{query}
Here are tables from my database (just the names):
{name_list}
If none of these tables are usable, then only respond with 'No tables usable'.
If some tables are usable, only respond with the names, separated by semicolons.)";

const char* const kComplexFilterTemplate =
    R"(I want you to suggest table names that would be useful to rewrite a given SQL query.
I will not provide you with the tables in my database, so suggest any table names you deem fitting.
The tables should be usable to answer the query such that the information gain stays the same for a human.
Synonyms, hyponyms, correlations, and similar topics should be important when choosing the usable tables.
I have the following SQL query:
{query}
Only respond with the suggested table names, separated by semicolons.)";

const char* const kSimpleRewriteTemplate =
    R"(I have the following SQL query:
{query}
I do not have access to the tables needed in the query.
I do have the following tables in my database (written in the format:
table: column1 type1, column2 type2 \n Foreign keys (if existent)):
{filtered_tables}
Keep the foreign keys in mind if you join any tables.
I want to have queries that keep the same human intent and satisfy the information need as the given query.
These new queries should use the provided tables and columns from my database.
Give me {n} alternative queries. They should be as diverse as possible.
Only give the SQL queries and nothing more. Use a semicolon to separate the queries.)";

const char* const kNlRewriteTemplate =
    R"(I have the following description of an information need:
{intent}
I do not have access to the tables needed to satisfy it directly.
I do have the following tables in my database (written in the format:
table: column1 type1, column2 type2 \n Foreign keys (if existent)):
{filtered_tables}
Keep the foreign keys in mind if you join any tables.
I want to have SQL queries that keep the same human intent and satisfy the described information need.
These queries should use the provided tables and columns from my database.
Give me {n} alternative queries. They should be as diverse as possible.
Only give the SQL queries and nothing more. Use a semicolon to separate the queries.)";

const char* const kIntentTemplate =
    R"(Describe in one short paragraph the human information need behind this SQL query, without mentioning table or column names:
{query})";

const char* const kSimilarityTemplate =
    R"(I will give you a single SQL query called original query.
I will also give you multiple other SQL queries called alternative queries.
For each of the alternative queries, I want to calculate its similarity to the original query.
These similarities should be floating point values between 0 and 1, and you should use the following guidelines to appoint them:
The similarity between two queries is solely based on their intent.
If the expected result of the queries gives the same insight to a human being, their similarity should be 1.
This can include results that are correlated (e.g. rent and crime rate in a city) or that are virtually the same.
If the given insight is similar, but not the same, the value should be a floating point number between 0 and 1, depending on how high the similarity is.
If the query intents do not have anything to do with each other, the similarity should be 0.
For each given alternative query only return the assigned similarity value between 0 and 1.
Separate the similarity values using semicolons.
Here is the original query:
{input_query}
Here are the alternative queries:
{alternative_queries}
Give me only the similarity values separated with semicolons.)";

const char* const kCorrectionTemplate =
    R"(The following SQL query fails to execute on my database:
{sql}
I have the following tables in my database (written in the format:
table: column1 type1, column2 type2 \n Foreign keys (if existent)):
{tables}
Keep the foreign keys in mind if you join any tables.
The database returned this error message:
{error_message}
Correct the query so that it executes on the provided tables and columns, keeping its intent unchanged.
Return only the corrected SQL query.)";

std::string render(const std::string& tmpl,
                   const std::vector<std::pair<std::string, std::string>>& values) {
    std::string out = tmpl;
    for (const auto& [key, value] : values) {
        const std::string needle = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

std::string render_simple_filter(const std::string& query, const std::string& name_list) {
    return render(kSimpleFilterTemplate, {{"query", query}, {"name_list", name_list}});
}

std::string render_complex_filter(const std::string& query) {
    return render(kComplexFilterTemplate, {{"query", query}});
}

std::string render_simple_rewrite(const std::string& query, const std::string& filtered_tables,
                                  int n) {
    return render(kSimpleRewriteTemplate, {{"query", query},
                                           {"filtered_tables", filtered_tables},
                                           {"n", std::to_string(n)}});
}

std::string render_nl_rewrite(const std::string& intent, const std::string& filtered_tables,
                              int n) {
    return render(kNlRewriteTemplate, {{"intent", intent},
                                       {"filtered_tables", filtered_tables},
                                       {"n", std::to_string(n)}});
}

std::string render_intent(const std::string& query) {
    return render(kIntentTemplate, {{"query", query}});
}

std::string render_similarity(const std::string& input_query,
                              const std::string& alternative_queries) {
    return render(kSimilarityTemplate,
                  {{"input_query", input_query}, {"alternative_queries", alternative_queries}});
}

std::string render_correction(const std::string& sql, const std::string& tables,
                              const std::string& error_message) {
    return render(kCorrectionTemplate,
                  {{"sql", sql}, {"tables", tables}, {"error_message", error_message}});
}

} // namespace requery::prompts
