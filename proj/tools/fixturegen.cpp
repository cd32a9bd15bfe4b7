// Regenerates the replay fixtures under tests/fixtures/ by running the full
// pipeline in record mode against a scripted transport. Run it whenever a
// prompt template or the demo catalog changes:
//
//   fixturegen <catalog50_dir> <vectors_file> <output_fixture_file>

#include "requery/pipeline.hpp"

#include "../tests/support/sample_queries.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace requery;

namespace {

struct Scenario {
    std::string query;
    std::string suggestions;       // complex-filter response
    std::string intent;            // intent-extraction response
    std::string rewrites_response; // NL-rewrite response (n=5)
    std::map<std::string, std::string> fixes; // faulty SQL -> corrected SQL
};

std::vector<Scenario> scenarios() {
    std::vector<Scenario> out;

    Scenario easy;
    easy.query = testdata::kQueryEasy;
    easy.suggestions = "university_students; student_records; college_enrollment; campus_directory";
    easy.intent = "The user wants to know how many students are enrolled at the college in total.";
    easy.rewrites_response =
        "```sql\n"
        "SELECT count(*) FROM college_2_Student;\n"
        "SELECT count(*) FROM college_2_Enrollment;\n"
        "SELECT count(DISTINCT StuID) FROM college_2_Enrollment;\n"
        "SELECT count(*) FROM college_2_Student WHERE Age >= 18;\n"
        "SELECT count(student_id) FROM college_2_Student\n"
        "```";
    easy.fixes["SELECT count(student_id) FROM college_2_Student"] =
        "SELECT count(StuID) FROM college_2_Student";
    out.push_back(std::move(easy));

    Scenario medium;
    medium.query = testdata::kQueryMedium;
    medium.suggestions = "school_budget; district_funding; education_spending; school_accounts";
    medium.intent =
        "The user wants an overview of each school's finances for the year 2024, covering the "
        "planned budget, the invested amount, and the overall total.";
    medium.rewrites_response =
        "SELECT s.school_name, b.total_budget, b.budgeted_money, b.invested_money FROM "
        "school_finance_1_School s JOIN school_finance_1_Budget b ON s.school_id = b.school_id "
        "WHERE b.year = 2024;\n"
        "SELECT s.school_name, b.budgeted_money + b.invested_money AS total FROM "
        "school_finance_1_School s JOIN school_finance_1_Budget b ON s.school_id = b.school_id "
        "WHERE b.year = 2024;\n"
        "SELECT s.school_name, i.amount FROM school_finance_1_School s JOIN "
        "school_finance_1_Investment i ON s.school_id = i.school_id WHERE i.year = 2024;\n"
        "SELECT school_id, SUM(amount) AS total_endowment FROM school_finance_1_Endowment GROUP "
        "BY school_id;\n"
        "SELECT s.school_name, b.total_budget FROM school_finance_1_School s JOIN "
        "school_finance_1_Budget b ON s.school_id = b.school_id WHERE b.fiscal_year = 2024";
    medium.fixes["SELECT s.school_name, b.total_budget FROM school_finance_1_School s JOIN "
                 "school_finance_1_Budget b ON s.school_id = b.school_id WHERE b.fiscal_year = "
                 "2024"] =
        "SELECT s.school_name, b.total_budget FROM school_finance_1_School s JOIN "
        "school_finance_1_Budget b ON s.school_id = b.school_id WHERE b.year = 2024";
    out.push_back(std::move(medium));

    Scenario hard;
    hard.query = testdata::kQueryHard;
    hard.suggestions =
        "book_sales; author_royalties; bookstore_orders; publisher_catalog; customer_reviews";
    hard.intent =
        "The user wants to rank writers whose names start with the letter M by how many of "
        "their works were bought after the start of 2020.";
    hard.rewrites_response =
        "SELECT a.author_id, a.author_name, COUNT(o.order_id) AS total_sales FROM "
        "book_club_1_Author a JOIN book_club_1_Book b ON a.author_id = b.author_id JOIN "
        "book_club_1_Book_Order o ON b.book_id = o.book_id WHERE a.author_name LIKE 'M%' AND "
        "o.purchase_date > '2020-01-01' GROUP BY a.author_id, a.author_name ORDER BY total_sales "
        "DESC;\n"
        "SELECT b.author_id, COUNT(*) AS orders FROM book_club_1_Book b JOIN "
        "book_club_1_Book_Order o ON b.book_id = o.book_id GROUP BY b.author_id ORDER BY orders "
        "DESC;\n"
        "SELECT a.author_name, s.school_name FROM book_club_1_Author a, school_finance_1_School "
        "s WHERE a.author_id = s.school_id;\n"
        "SELECT title, price FROM book_club_1_Bookstore;\n"
        "SELECT c.customer_name, COUNT(o.order_id) AS total_orders FROM book_club_1_Customer c "
        "JOIN book_club_1_Book_Order o ON c.customer_id = o.customer_id GROUP BY c.customer_name "
        "ORDER BY total_orders DESC";
    // "book_club_1_Bookstore" does not exist and never gets fixed: the
    // responder echoes the broken query back, so the loop exhausts its
    // three iterations and the candidate lands in the uncorrectable bucket.
    out.push_back(std::move(hard));

    return out;
}

std::string section(const std::string& text, const std::string& after, const std::string& before) {
    std::size_t begin = text.find(after);
    if (begin == std::string::npos) return "";
    begin += after.size();
    std::size_t end = before.empty() ? text.size() : text.find(before, begin);
    if (end == std::string::npos) return "";
    return text.substr(begin, end - begin);
}

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

// Content-stable pseudo-score in [0.30, 0.95): the ranking exercises real
// orderings without a human in the loop.
double stable_score(const std::string& sql) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : normalize_sql(sql)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return 0.30 + static_cast<double>(h % 650) / 1000.0;
}

std::string respond(const std::vector<Scenario>& all, const std::string& prompt) {
    if (prompt.rfind("I want you to suggest table names", 0) == 0) {
        std::string query =
            trim(section(prompt, "I have the following SQL query:\n", "\nOnly respond"));
        for (const Scenario& s : all)
            if (trim(s.query) == query) return s.suggestions;
        return "";
    }
    if (prompt.rfind("Describe in one short paragraph", 0) == 0) {
        std::string query = trim(section(prompt, "column names:\n", ""));
        for (const Scenario& s : all)
            if (trim(s.query) == query) return s.intent;
        return "";
    }
    if (prompt.rfind("I have the following description of an information need:", 0) == 0) {
        std::string intent =
            trim(section(prompt, "information need:\n", "\nI do not have access"));
        for (const Scenario& s : all)
            if (s.intent == intent) return s.rewrites_response;
        return "";
    }
    if (prompt.rfind("I will give you a single SQL query", 0) == 0) {
        std::string alts = section(prompt, "Here are the alternative queries:\n",
                                   "\nGive me only the similarity values");
        std::string response;
        std::size_t begin = 0;
        while (begin <= alts.size()) {
            std::size_t end = alts.find(';', begin);
            if (end == std::string::npos) end = alts.size();
            std::string alt = trim(alts.substr(begin, end - begin));
            begin = end + 1;
            if (alt.empty()) continue;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%.3f", stable_score(alt));
            if (!response.empty()) response += "; ";
            response += buf;
        }
        return response;
    }
    if (prompt.rfind("The following SQL query fails to execute", 0) == 0) {
        std::string faulty =
            trim(section(prompt, "fails to execute on my database:\n", "\nI have the following"));
        for (const Scenario& s : all) {
            auto fix = s.fixes.find(faulty);
            if (fix != s.fixes.end()) return fix->second;
        }
        return faulty; // no fix scripted: stays broken on purpose
    }
    if (prompt.rfind("I want you to decide which", 0) == 0) {
        // one package covers the demo catalog; answer only for the easy query
        if (prompt.find("college_students") != std::string::npos)
            return "college_2_Student; college_2_Enrollment; college_2_Course; "
                   "college_2_Department; college_2_Instructor";
        return "No tables usable";
    }
    return "";
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::cerr << "usage: fixturegen <catalog_dir> <vectors_file> <output_fixture>\n";
        return 2;
    }
    const std::filesystem::path catalog_dir = argv[1];
    const std::filesystem::path vectors_path = argv[2];
    const std::filesystem::path out_path = argv[3];

    Catalog catalog = load_catalog(catalog_dir);
    VectorStore vectors = load_vectors(vectors_path);
    std::vector<Scenario> all = scenarios();

    std::filesystem::remove(out_path);
    LlmTransport scripted = [&all](const LlmModelSpec&, const std::string& prompt) {
        std::string text = respond(all, prompt);
        return LlmReply{text, estimate_tokens(prompt), estimate_tokens(text)};
    };
    LlmGateway gate = LlmGateway::record(out_path, scripted);

    PipelineConfig cfg; // defaults: CLLM filter, NL rewriter, MMR + LLM similarity, n=5
    for (const Scenario& s : all) {
        PipelineReport report = run(s.query, cfg, catalog, vectors, gate);
        std::cout << "recorded: raw=" << report.raw_candidates << " pruned=" << report.pruned
                  << " uncorrectable=" << report.uncorrectable << " ranked=" << report.ranked.size()
                  << " exchanges_so_far=" << gate.call_count() << "\n";
    }

    // one extra pass with the simple LLM filter; the scripted filter answer
    // matches the complex filter's table set, so the downstream prompts are
    // shared with the recordings above
    PipelineConfig sllm_cfg = cfg;
    sllm_cfg.filter.strategy = FilterStrategy::simple_llm;
    PipelineReport sllm = run(testdata::kQueryEasy, sllm_cfg, catalog, vectors, gate);
    std::cout << "recorded (sllm): filter_tables=" << sllm.filter_tables.relevant_tables.size()
              << " exchanges_total=" << gate.call_count() << "\n";

    std::cout << "fixture written to " << out_path << "\n";
    return 0;
}
