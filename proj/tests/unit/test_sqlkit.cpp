#include "requery/sqlkit.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <random>

using namespace requery;

namespace {

// Independent oracle: the recursive Ratcliff/Obershelp definition, computed
// by brute force. Longest common contiguous block (maximal size, ties to the
// earliest start in a, then in b), recurse left and right, sum the matches.
struct OracleBlock {
    std::size_t a = 0, b = 0, size = 0;
};

OracleBlock oracle_longest_block(const std::string& a, const std::string& b, std::size_t alo,
                                 std::size_t ahi, std::size_t blo, std::size_t bhi) {
    OracleBlock best{alo, blo, 0};
    for (std::size_t i = alo; i < ahi; ++i) {
        for (std::size_t j = blo; j < bhi; ++j) {
            std::size_t k = 0;
            while (i + k < ahi && j + k < bhi && a[i + k] == b[j + k]) ++k;
            if (k > best.size) best = {i, j, k};
        }
    }
    return best;
}

double oracle_ratio(const std::string& a, const std::string& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t matched = 0;
    std::vector<std::array<std::size_t, 4>> stack;
    stack.push_back({0, a.size(), 0, b.size()});
    while (!stack.empty()) {
        auto [alo, ahi, blo, bhi] = stack.back();
        stack.pop_back();
        OracleBlock m = oracle_longest_block(a, b, alo, ahi, blo, bhi);
        if (m.size == 0) continue;
        matched += m.size;
        stack.push_back({alo, m.a, blo, m.b});
        stack.push_back({m.a + m.size, ahi, m.b + m.size, bhi});
    }
    return 2.0 * static_cast<double>(matched) / static_cast<double>(a.size() + b.size());
}

std::string random_string(std::mt19937& rng, std::size_t max_len) {
    static const std::string alphabet = "abcdeST ()*,";
    std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
    std::uniform_int_distribution<std::size_t> char_dist(0, alphabet.size() - 1);
    std::string out;
    const std::size_t len = len_dist(rng);
    for (std::size_t i = 0; i < len; ++i) out += alphabet[char_dist(rng)];
    return out;
}

} // namespace

TEST_CASE("tokenize_name splits snake case") {
    CHECK(tokenize_name("snake_case") == std::vector<std::string>{"snake", "case"});
}

TEST_CASE("tokenize_name splits camel case") {
    CHECK(tokenize_name("CamelCase") == std::vector<std::string>{"camel", "case"});
    CHECK(tokenize_name("camelCase") == std::vector<std::string>{"camel", "case"});
}

TEST_CASE("tokenize_name handles prefixed table names") {
    CHECK(tokenize_name("soccer_1_Team") == std::vector<std::string>{"soccer", "1", "team"});
}

TEST_CASE("tokenize_name keeps digits attached to the preceding token") {
    CHECK(tokenize_name("table2Name") == std::vector<std::string>{"table2", "name"});
    CHECK(tokenize_name("abc123") == std::vector<std::string>{"abc123"});
}

TEST_CASE("tokenize_name of empty input is empty") { CHECK(tokenize_name("").empty()); }

TEST_CASE("tokenize_name is idempotent after the first pass") {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        std::string name = random_string(rng, 20);
        auto once = tokenize_name(name);
        std::string rejoined;
        for (std::size_t k = 0; k < once.size(); ++k) {
            if (k) rejoined += "_";
            rejoined += once[k];
        }
        CHECK(tokenize_name(rejoined) == once);
    }
}

TEST_CASE("structural_similarity of identical strings is 1") {
    CHECK(structural_similarity("abc", "abc") == 1.0);
    CHECK(structural_similarity("SELECT * FROM t", "SELECT * FROM t") == 1.0);
    CHECK(structural_similarity("", "") == 1.0); // convention
}

TEST_CASE("structural_similarity of disjoint alphabets is 0") {
    CHECK(structural_similarity("abc", "xyz") == 0.0);
}

TEST_CASE("structural_similarity on near-identical queries") {
    // "SELECT a FROM t" vs "SELECT b FROM t": blocks "SELECT " and " FROM t"
    // match, 14 of 15 characters on each side
    const double expected = 2.0 * 14.0 / 30.0;
    CHECK(oracle_ratio("SELECT a FROM t", "SELECT b FROM t") == doctest::Approx(expected));
    CHECK(structural_similarity("SELECT a FROM t", "SELECT b FROM t") == expected);
}

TEST_CASE("structural_similarity matches the recursive oracle exactly") {
    std::mt19937 rng(42);
    for (int i = 0; i < 200; ++i) {
        std::string a = random_string(rng, 30);
        std::string b = random_string(rng, 30);
        CAPTURE(a);
        CAPTURE(b);
        CHECK(structural_similarity(a, b) == oracle_ratio(a, b));
    }
}

TEST_CASE("structural_similarity stays within [0,1] and is 1 on self") {
    std::mt19937 rng(43);
    for (int i = 0; i < 100; ++i) {
        std::string s = random_string(rng, 40);
        if (!s.empty()) CHECK(structural_similarity(s, s) == 1.0);
        std::string t = random_string(rng, 40);
        double r = structural_similarity(s, t);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
    }
}

TEST_CASE("analyze_query extracts tables and join edges from the prunable example") {
    QueryAnalysis a = analyze_query(
        "SELECT CONCAT(Fname, ' ', LName) AS full_student_name\n"
        "FROM dorm_1_Student d, pets_1_Has_Pet hp, pets_1_Pets p \n"
        "WHERE d.StuID = hp.StuID AND hp.PetID = p.PetID \n"
        "       AND p.PetType = 'Cat'");
    REQUIRE(a.parse_ok);
    CHECK(a.referenced_tables ==
          std::vector<std::string>{"dorm_1_Student", "pets_1_Has_Pet", "pets_1_Pets"});
    REQUIRE(a.join_edges.size() == 2);
    CHECK(a.join_edges[0] == JoinEdge{"dorm_1_Student", "StuID", "pets_1_Has_Pet", "StuID"});
    CHECK(a.join_edges[1] == JoinEdge{"pets_1_Has_Pet", "PetID", "pets_1_Pets", "PetID"});
}

TEST_CASE("analyze_query on a single-table aggregate") {
    QueryAnalysis a = analyze_query("SELECT count(*) FROM college_students;");
    REQUIRE(a.parse_ok);
    CHECK(a.referenced_tables == std::vector<std::string>{"college_students"});
    CHECK(a.join_edges.empty());
}

TEST_CASE("analyze_query rejects malformed SQL without crashing") {
    QueryAnalysis a = analyze_query("SELEC x FRM t");
    CHECK_FALSE(a.parse_ok);
    CHECK_FALSE(a.parse_error.empty());
    CHECK(a.referenced_tables.empty());
    CHECK(a.join_edges.empty());
}

TEST_CASE("analyze_query rejects non-SELECT statements") {
    CHECK_FALSE(analyze_query("INSERT INTO t VALUES (1)").parse_ok);
    CHECK_FALSE(analyze_query("DROP TABLE t").parse_ok);
    CHECK_FALSE(analyze_query("").parse_ok);
}

TEST_CASE("analyze_query parses explicit joins with ON conditions") {
    QueryAnalysis a = analyze_query(
        "SELECT a.author_id, COUNT(b.book_id) as total_sales "
        "FROM authors a JOIN book_orders b ON a.author_id = b.book_author "
        "WHERE a.author_name LIKE 'M%' AND b.purchase_date > '2020-01-01' "
        "GROUP BY a.author_id ORDER BY total_sales DESC;");
    REQUIRE(a.parse_ok);
    CHECK(a.referenced_tables == std::vector<std::string>{"authors", "book_orders"});
    REQUIRE(a.join_edges.size() == 1);
    CHECK(a.join_edges[0] == JoinEdge{"authors", "author_id", "book_orders", "book_author"});
}

TEST_CASE("analyze_query parses window functions") {
    QueryAnalysis a = analyze_query(
        "SELECT group_name, RANK() OVER (PARTITION BY region ORDER BY popularity DESC) AS r "
        "FROM drama_workshop_groups");
    REQUIRE(a.parse_ok);
    CHECK(a.referenced_tables == std::vector<std::string>{"drama_workshop_groups"});
}

TEST_CASE("analyze_query handles subqueries and IN lists") {
    QueryAnalysis a = analyze_query(
        "SELECT name FROM students WHERE id IN (SELECT student_id FROM enrollments e "
        "WHERE e.course_id = 5) AND age > (SELECT AVG(age) FROM students)");
    REQUIRE(a.parse_ok);
    CHECK(a.references("students"));
    CHECK(a.references("enrollments"));
}

TEST_CASE("analyze_query resolves CTEs without counting them as tables") {
    QueryAnalysis a = analyze_query(
        "WITH recent AS (SELECT * FROM orders WHERE year = 2024) "
        "SELECT r.id FROM recent r JOIN customers c ON r.customer_id = c.id");
    REQUIRE(a.parse_ok);
    CHECK(a.references("orders"));
    CHECK(a.references("customers"));
    CHECK_FALSE(a.references("recent"));
    // the recent/customers equality touches a CTE occurrence, so no edge
    CHECK(a.join_edges.empty());
}

TEST_CASE("analyze_query records USING joins as edges") {
    QueryAnalysis a = analyze_query("SELECT * FROM t1 JOIN t2 USING (k)");
    REQUIRE(a.parse_ok);
    REQUIRE(a.join_edges.size() == 1);
    CHECK(a.join_edges[0] == JoinEdge{"t1", "k", "t2", "k"});
}

TEST_CASE("analyze_query never emits an edge for a single occurrence") {
    QueryAnalysis a = analyze_query("SELECT * FROM t WHERE t.a = t.b");
    REQUIRE(a.parse_ok);
    CHECK(a.join_edges.empty());
}

TEST_CASE("analyze_query distinguishes self-join aliases") {
    QueryAnalysis a = analyze_query("SELECT * FROM emp a, emp b WHERE a.boss_id = b.emp_id");
    REQUIRE(a.parse_ok);
    CHECK(a.referenced_tables == std::vector<std::string>{"emp"});
    REQUIRE(a.join_edges.size() == 1);
    CHECK(a.join_edges[0] == JoinEdge{"emp", "boss_id", "emp", "emp_id"});
}

TEST_CASE("analyze_query ignores literal comparisons") {
    QueryAnalysis a =
        analyze_query("SELECT * FROM t1 a, t2 b WHERE a.x = 'b.y' AND a.k = 3 AND b.z = a.w");
    REQUIRE(a.parse_ok);
    REQUIRE(a.join_edges.size() == 1);
    CHECK(a.join_edges[0] == JoinEdge{"t2", "z", "t1", "w"});
}

TEST_CASE("analyze_query join edges always reference known tables") {
    const char* queries[] = {
        "SELECT * FROM a JOIN b ON a.x = b.y JOIN c ON b.y = c.z",
        "SELECT * FROM a, b, c WHERE a.x = b.y AND b.q = c.r AND a.k = 1",
        "SELECT (SELECT max(v) FROM inner1 i WHERE i.k = o.k) FROM outer1 o",
    };
    for (const char* q : queries) {
        QueryAnalysis a = analyze_query(q);
        REQUIRE(a.parse_ok);
        for (const JoinEdge& e : a.join_edges) {
            CHECK(a.references(e.left_table));
            CHECK(a.references(e.right_table));
        }
    }
}

TEST_CASE("analyze_query handles set operations and trailing clauses") {
    QueryAnalysis a = analyze_query(
        "SELECT name FROM cats UNION ALL SELECT name FROM dogs ORDER BY name LIMIT 5");
    REQUIRE(a.parse_ok);
    CHECK(a.references("cats"));
    CHECK(a.references("dogs"));

    QueryAnalysis parenthesized =
        analyze_query("(SELECT x FROM t1) UNION (SELECT x FROM t2) ORDER BY x");
    REQUIRE(parenthesized.parse_ok);
    CHECK(parenthesized.references("t1"));
    CHECK(parenthesized.references("t2"));
}

TEST_CASE("analyze_query rejects trailing garbage") {
    CHECK_FALSE(analyze_query("SELECT 1; SELECT 2").parse_ok);
    CHECK_FALSE(analyze_query("SELECT a FROM t WHERE ( x = 1").parse_ok);
}

TEST_CASE("analyze_query tolerates clause keywords inside parentheses") {
    // aggregate FILTER and CAST both nest keyword-looking tokens
    QueryAnalysis filtered = analyze_query(
        "SELECT count(*) FILTER (WHERE amount > 0) FROM payments");
    REQUIRE(filtered.parse_ok);
    CHECK(filtered.references("payments"));

    QueryAnalysis cast = analyze_query("SELECT CAST(x AS INTEGER) FROM t GROUP BY x");
    REQUIRE(cast.parse_ok);

    QueryAnalysis in_list = analyze_query("SELECT * FROM t WHERE x IN (1, 2, 3)");
    REQUIRE(in_list.parse_ok);
    CHECK(in_list.join_edges.empty());
}

TEST_CASE("analyze_query is case-insensitive about keywords and aliases") {
    QueryAnalysis a = analyze_query(
        "select S.fname from pets_1_Student s join pets_1_Has_Pet HP on s.StuID = hp.StuID");
    REQUIRE(a.parse_ok);
    REQUIRE(a.join_edges.size() == 1);
    CHECK(a.join_edges[0].left_table == "pets_1_Student");
    CHECK(a.join_edges[0].right_table == "pets_1_Has_Pet");
}

TEST_CASE("analyze_query never crashes on random token soup") {
    std::mt19937 rng(2024);
    static const char* pieces[] = {"SELECT", "FROM",  "WHERE", "JOIN", "ON",   "(",    ")",
                                   ",",      ";",     "=",     "'s'",  "1.5",  "tbl",  "a.b",
                                   "AND",    "UNION", "AS",    "*",    "\"q\"", "--c\n", "ORDER"};
    std::uniform_int_distribution<std::size_t> pick(0, sizeof(pieces) / sizeof(pieces[0]) - 1);
    std::uniform_int_distribution<int> len(0, 25);
    for (int round = 0; round < 500; ++round) {
        std::string soup;
        int n = len(rng);
        for (int i = 0; i < n; ++i) {
            soup += pieces[pick(rng)];
            soup += " ";
        }
        QueryAnalysis a = analyze_query(soup); // must return, never throw or hang
        if (!a.parse_ok) {
            CHECK(a.referenced_tables.empty());
            CHECK(a.join_edges.empty());
        }
    }
}

TEST_CASE("analyze_query handles quoted identifiers") {
    QueryAnalysis a = analyze_query(
        "SELECT \"d\".\"Value\" FROM \"ground_value\" d JOIN `districts` x ON d.gid = x.gid");
    REQUIRE(a.parse_ok);
    CHECK(a.referenced_tables == std::vector<std::string>{"ground_value", "districts"});
    REQUIRE(a.join_edges.size() == 1);
}
