#include "requery/filters.hpp"

#include "requery/errors.hpp"
#include "requery/prompts.hpp"
#include "../support/paths.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

using namespace requery;
namespace td = requery::testdata;

namespace {

const Catalog& catalog50() {
    static Catalog c = load_catalog(td::catalog50_dir());
    return c;
}

const VectorStore& vectors() {
    static VectorStore v = load_vectors(td::vectors_path());
    return v;
}

LlmGateway scripted_gateway(std::function<std::string(const std::string&)> responder) {
    return LlmGateway::live([responder](const LlmModelSpec&, const std::string& prompt) {
        std::string text = responder(prompt);
        return LlmReply{text, estimate_tokens(prompt), estimate_tokens(text)};
    });
}

bool is_subset(const std::vector<std::string>& inner, const std::vector<std::string>& outer) {
    std::set<std::string> outer_set(outer.begin(), outer.end());
    return std::all_of(inner.begin(), inner.end(),
                       [&](const std::string& name) { return outer_set.count(name) > 0; });
}

// brute-force scan used as the filter oracle: all cosines, no shortcuts
std::vector<std::string> embedding_oracle(const Catalog& catalog,
                                          const std::vector<std::string>& query_tables,
                                          const VectorStore& store, double threshold) {
    std::vector<std::string> out;
    for (const std::string& name : catalog.table_names()) {
        bool passes = false;
        for (const std::string& q : query_tables) {
            if (cosine(store.embed_name(name), store.embed_name(q)) >= threshold) passes = true;
        }
        if (passes) out.push_back(name);
    }
    return out;
}

} // namespace

TEST_CASE("embedding_filter requires a parsed query") {
    QueryAnalysis bad = analyze_query("SELEC nope");
    FilterConfig cfg;
    CHECK_THROWS_AS(embedding_filter(catalog50(), bad, vectors(), cfg), Error);
}

TEST_CASE("embedding_filter at epsilon 0 passes every in-vocabulary table") {
    QueryAnalysis q = analyze_query("SELECT count(*) FROM college_students;");
    REQUIRE(q.parse_ok);
    FilterConfig cfg;
    cfg.epsilon = 0.0;
    FilterResult result = embedding_filter(catalog50(), q, vectors(), cfg);
    for (const std::string& name : catalog50().table_names()) {
        if (!vectors().embed_name(name).is_oov()) {
            CAPTURE(name);
            CHECK(std::find(result.relevant_tables.begin(), result.relevant_tables.end(), name) !=
                  result.relevant_tables.end());
        }
    }
    CHECK(result.exchanges.empty()); // no LLM involved, ever
}

TEST_CASE("embedding_filter at epsilon 1 still passes the query's own table") {
    QueryAnalysis q = analyze_query("SELECT * FROM pets_1_Pets");
    REQUIRE(q.parse_ok);
    FilterConfig cfg;
    cfg.epsilon = 1.0;
    FilterResult result = embedding_filter(catalog50(), q, vectors(), cfg);
    CHECK(std::find(result.relevant_tables.begin(), result.relevant_tables.end(), "pets_1_Pets") !=
          result.relevant_tables.end());
}

TEST_CASE("embedding_filter equals the brute-force cosine scan at epsilon 0.4") {
    QueryAnalysis q = analyze_query("SELECT count(*) FROM college_students;");
    REQUIRE(q.parse_ok);
    FilterConfig cfg;
    cfg.epsilon = 0.4;
    FilterResult result = embedding_filter(catalog50(), q, vectors(), cfg);
    CHECK(result.relevant_tables ==
          embedding_oracle(catalog50(), q.referenced_tables, vectors(), 0.4));
    CHECK_FALSE(result.relevant_tables.empty());
}

TEST_CASE("embedding_filter results shrink as epsilon rises") {
    QueryAnalysis q = analyze_query("SELECT count(*) FROM college_students;");
    REQUIRE(q.parse_ok);
    std::vector<std::string> previous;
    bool first = true;
    for (double eps : {0.0, 0.2, 0.4, 0.7, 1.0}) {
        FilterConfig cfg;
        cfg.epsilon = eps;
        FilterResult r = embedding_filter(catalog50(), q, vectors(), cfg);
        if (!first) CHECK(is_subset(r.relevant_tables, previous));
        previous = r.relevant_tables;
        first = false;
    }
}

TEST_CASE("partition_packages fits everything into one package when budgets allow") {
    LlmModelSpec spec;
    FilterConfig cfg;
    auto packages = partition_packages(catalog50().table_names(), "SELECT 1", spec, cfg);
    CHECK(packages.size() == 1);
    CHECK(packages[0].size() == catalog50().table_count());
}

TEST_CASE("partition_packages of an empty list is empty") {
    LlmModelSpec spec;
    FilterConfig cfg;
    CHECK(partition_packages({}, "q", spec, cfg).empty());
}

TEST_CASE("partition_packages respects both budgets under shrunk limits") {
    LlmModelSpec spec;
    spec.context_window = 500;
    spec.max_output_tokens = 100;
    FilterConfig cfg;
    cfg.expected_return_fraction = 0.5;

    std::vector<std::string> names;
    for (int i = 0; i < 200; ++i) names.push_back("tbl_" + std::to_string(1000 + i));
    const std::string query = "SELECT * FROM data";

    auto packages = partition_packages(names, query, spec, cfg);
    CHECK(packages.size() > 1);

    // independent recomputation of the two budget inequalities
    const std::int64_t overhead =
        estimate_tokens(prompts::render_simple_filter("", "")) + estimate_tokens(query);
    std::vector<std::string> concatenated;
    for (const auto& package : packages) {
        std::int64_t name_tokens = 0;
        for (const std::string& n : package) name_tokens += estimate_tokens(n);
        CHECK(overhead + name_tokens + spec.max_output_tokens <= spec.context_window);
        CHECK(static_cast<double>(name_tokens) * cfg.expected_return_fraction <=
              static_cast<double>(spec.max_output_tokens));
        concatenated.insert(concatenated.end(), package.begin(), package.end());
    }
    CHECK(concatenated == names); // same multiset, same order
}

TEST_CASE("partition_packages rejects a name that cannot fit any package") {
    LlmModelSpec spec;
    spec.context_window = 500;
    spec.max_output_tokens = 100;
    FilterConfig cfg;
    std::vector<std::string> names = {std::string(2000, 'x')};
    CHECK_THROWS_AS(partition_packages(names, "q", spec, cfg), PackagingError);
}

TEST_CASE("simple_llm_filter honors the no-tables sentinel") {
    LlmGateway gate = scripted_gateway([](const std::string&) { return "No tables usable"; });
    LlmModelSpec spec;
    FilterConfig cfg;
    FilterResult r = simple_llm_filter(catalog50(), "SELECT 1", gate, spec, cfg);
    CHECK(r.relevant_tables.empty());
    CHECK(r.exchanges.size() == 1);
}

TEST_CASE("simple_llm_filter drops hallucinated names") {
    LlmGateway gate =
        scripted_gateway([](const std::string&) { return "pets_1_Pets; unicorn_table"; });
    LlmModelSpec spec;
    FilterConfig cfg;
    FilterResult r = simple_llm_filter(catalog50(), "SELECT 1", gate, spec, cfg);
    CHECK(r.relevant_tables == std::vector<std::string>{"pets_1_Pets"});
}

TEST_CASE("simple_llm_filter unions packages in catalog order") {
    // shrink the budgets so the catalog spans several packages, then answer
    // every package with names from elsewhere in the catalog
    LlmModelSpec spec;
    spec.context_window = 420;
    spec.max_output_tokens = 64;
    FilterConfig cfg;

    int call = 0;
    LlmGateway gate = scripted_gateway([&call](const std::string&) {
        ++call;
        if (call == 1) return std::string("soccer_2_Team; pets_1_Student.");
        if (call == 2) return std::string("college_2_Course");
        return std::string("No tables usable.");
    });
    FilterResult r = simple_llm_filter(catalog50(), "SELECT 1", gate, spec, cfg);
    CHECK(r.exchanges.size() >= 2);

    // output follows catalog order, not response order
    std::vector<std::string> expected;
    for (const std::string& name : catalog50().table_names())
        if (name == "soccer_2_Team" || name == "pets_1_Student" || name == "college_2_Course")
            expected.push_back(name);
    CHECK(r.relevant_tables == expected);
}

TEST_CASE("simple_llm_filter responses never leak names outside the catalog") {
    LlmGateway gate = scripted_gateway(
        [](const std::string&) { return "ghost_table; pets_1_Pets; also_missing; dorm_1_Dorm"; });
    LlmModelSpec spec;
    FilterConfig cfg;
    FilterResult r = simple_llm_filter(catalog50(), "SELECT 1", gate, spec, cfg);
    for (const std::string& name : r.relevant_tables) CHECK(catalog50().contains(name));
}

TEST_CASE("complex_llm_filter passes a table whose name is suggested verbatim") {
    LlmGateway gate = scripted_gateway([](const std::string&) { return "pets_1_Has_Pet"; });
    LlmModelSpec spec;
    FilterConfig cfg;
    cfg.gamma = 1.0;
    FilterResult r = complex_llm_filter(catalog50(), "SELECT 1", gate, spec, vectors(), cfg);
    CHECK(std::find(r.relevant_tables.begin(), r.relevant_tables.end(), "pets_1_Has_Pet") !=
          r.relevant_tables.end());
}

TEST_CASE("complex_llm_filter with no suggestions returns an empty result") {
    LlmGateway gate = scripted_gateway([](const std::string&) { return "   "; });
    LlmModelSpec spec;
    FilterConfig cfg;
    FilterResult r = complex_llm_filter(catalog50(), "SELECT 1", gate, spec, vectors(), cfg);
    CHECK(r.relevant_tables.empty());
    CHECK(r.exchanges.size() == 1);
}

TEST_CASE("complex_llm_filter matching equals the brute-force cosine scan") {
    std::vector<std::string> suggestions = {"university_students", "student_records",
                                            "college_enrollment"};
    std::vector<std::string> matched = match_suggestions(catalog50(), suggestions, vectors(), 0.7);
    CHECK(matched == embedding_oracle(catalog50(), suggestions, vectors(), 0.7));
    CHECK_FALSE(matched.empty());
}

TEST_CASE("match_suggestions results shrink as gamma rises") {
    std::vector<std::string> suggestions = {"school_budget", "district_funding"};
    std::vector<std::string> previous;
    bool first = true;
    for (double gamma : {0.0, 0.2, 0.4, 0.7, 1.0}) {
        auto r = match_suggestions(catalog50(), suggestions, vectors(), gamma);
        if (!first) CHECK(is_subset(r, previous));
        previous = r;
        first = false;
    }
}
