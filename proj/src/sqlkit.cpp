#include "requery/sqlkit.hpp"

#include "sql_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace requery {

namespace {

using lex::ParseFail;
using lex::Token;
using lex::TokKind;

std::string to_lower(std::string s) { return lex::lower_copy(std::move(s)); }

// ---------------------------------------------------------------------------
// SELECT-statement walker

const std::unordered_set<std::string> kClauseKeywords = {
    "FROM",  "WHERE",  "GROUP",     "HAVING", "ORDER", "LIMIT", "OFFSET",
    "UNION", "INTERSECT", "EXCEPT", "FETCH",  "WINDOW"};

const std::unordered_set<std::string> kJoinKeywords = {"JOIN", "LEFT", "RIGHT",   "FULL",
                                                       "INNER", "CROSS", "NATURAL", "OUTER"};

bool is_clause_boundary(const Token& t) {
    return t.kind == TokKind::word && kClauseKeywords.count(t.upper) > 0;
}

bool is_join_keyword(const Token& t) {
    return t.kind == TokKind::word && kJoinKeywords.count(t.upper) > 0;
}

struct Occurrence {
    int id = 0;
    std::string table; // as written; empty for derived tables / CTEs / functions
    bool virtual_source = false;
};

struct Scope {
    std::unordered_map<std::string, int> bindings; // lowercased alias/name -> occurrence id
    std::unordered_set<std::string> cte_names;     // lowercased
    const Scope* parent = nullptr;

    const int* resolve(const std::string& lowered) const {
        auto it = bindings.find(lowered);
        if (it != bindings.end()) return &it->second;
        return parent ? parent->resolve(lowered) : nullptr;
    }

    bool is_cte(const std::string& lowered) const {
        if (cte_names.count(lowered)) return true;
        return parent ? parent->is_cte(lowered) : false;
    }
};

struct PendingEdge {
    std::string left_qual, left_col, right_qual, right_col;
    const Scope* scope = nullptr;
};

class Analyzer {
public:
    explicit Analyzer(const std::vector<Token>& toks) : toks_(toks) {}

    QueryAnalysis run() {
        QueryAnalysis out;
        auto root = std::make_unique<Scope>();
        scopes_.push_back(std::move(root));
        parse_statement_body(scopes_.front().get());
        if (cur().kind == TokKind::punct && cur().text == ";") advance();
        if (cur().kind != TokKind::end)
            throw ParseFail{"unexpected trailing input near '" + cur().text + "'"};
        resolve_edges(out);
        out.referenced_tables = referenced_;
        out.parse_ok = true;
        return out;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(std::size_t ahead = 1) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    void advance() {
        if (pos_ + 1 < toks_.size()) ++pos_;
    }

    bool at_word(const char* upper) const {
        return cur().kind == TokKind::word && !cur().quoted && cur().upper == upper;
    }
    bool at_punct(const char* p) const { return cur().kind == TokKind::punct && cur().text == p; }

    void expect_word(const char* upper) {
        if (!at_word(upper)) throw ParseFail{std::string("expected ") + upper + " near '" + cur().text + "'"};
        advance();
    }
    void expect_punct(const char* p) {
        if (!at_punct(p)) throw ParseFail{std::string("expected '") + p + "' near '" + cur().text + "'"};
        advance();
    }

    Scope* new_scope(const Scope* parent) {
        auto s = std::make_unique<Scope>();
        s->parent = parent;
        scopes_.push_back(std::move(s));
        return scopes_.back().get();
    }

    // WITH ... SELECT ... [UNION ...] [ORDER BY ...] [LIMIT ...]
    void parse_statement_body(Scope* enclosing) {
        Scope* scope = new_scope(enclosing);
        if (at_word("WITH")) {
            advance();
            if (at_word("RECURSIVE")) advance();
            while (true) {
                if (cur().kind != TokKind::word) throw ParseFail{"expected CTE name"};
                scope->cte_names.insert(to_lower(cur().text));
                advance();
                if (at_punct("(")) skip_balanced_parens();
                expect_word("AS");
                expect_punct("(");
                parse_statement_body(scope);
                expect_punct(")");
                if (at_punct(",")) {
                    advance();
                    continue;
                }
                break;
            }
        }
        parse_select_chain(scope);
    }

    enum class ExprContext { clause, join_condition, parenthesized };

    // a chain arm is either a bare SELECT core or a parenthesized statement
    void parse_chain_arm(Scope* scope) {
        if (at_punct("(") && (peek().kind == TokKind::word && !peek().quoted &&
                              (peek().upper == "SELECT" || peek().upper == "WITH"))) {
            advance();
            parse_statement_body(scope);
            expect_punct(")");
            return;
        }
        parse_select_core(scope);
    }

    void parse_select_chain(Scope* scope) {
        parse_chain_arm(scope);
        while (at_word("UNION") || at_word("INTERSECT") || at_word("EXCEPT")) {
            advance();
            if (at_word("ALL") || at_word("DISTINCT")) advance();
            // each arm of a set operation gets its own FROM bindings
            parse_chain_arm(new_scope(scope->parent));
        }
        if (at_word("ORDER")) {
            advance();
            expect_word("BY");
            consume_expr(scope, /*collect=*/false, ExprContext::clause);
        }
        if (at_word("LIMIT")) {
            advance();
            consume_expr(scope, false, ExprContext::clause);
        }
        if (at_word("OFFSET")) {
            advance();
            consume_expr(scope, false, ExprContext::clause);
        }
    }

    void parse_select_core(Scope* scope) {
        expect_word("SELECT");
        if (at_word("DISTINCT") || at_word("ALL")) advance();
        consume_expr(scope, false, ExprContext::clause); // select list, up to FROM
        if (at_word("FROM")) {
            advance();
            parse_from_list(scope);
        }
        if (at_word("WHERE")) {
            advance();
            consume_expr(scope, true, ExprContext::clause);
        }
        if (at_word("GROUP")) {
            advance();
            expect_word("BY");
            consume_expr(scope, false, ExprContext::clause);
        }
        if (at_word("HAVING")) {
            advance();
            consume_expr(scope, false, ExprContext::clause);
        }
        if (at_word("WINDOW")) {
            advance();
            consume_expr(scope, false, ExprContext::clause);
        }
    }

    void parse_from_list(Scope* scope) {
        int prev = parse_from_item(scope);
        while (true) {
            if (at_punct(",")) {
                advance();
                prev = parse_from_item(scope);
                continue;
            }
            if (is_join_keyword(cur())) {
                bool saw_join = false;
                while (is_join_keyword(cur())) {
                    if (at_word("JOIN")) saw_join = true;
                    advance();
                }
                if (!saw_join) throw ParseFail{"expected JOIN near '" + cur().text + "'"};
                int item = parse_from_item(scope);
                if (at_word("ON")) {
                    advance();
                    consume_expr(scope, true, ExprContext::join_condition);
                } else if (at_word("USING")) {
                    advance();
                    expect_punct("(");
                    while (cur().kind == TokKind::word) {
                        add_using_edge(prev, item, cur().text);
                        advance();
                        if (at_punct(",")) {
                            advance();
                            continue;
                        }
                        break;
                    }
                    expect_punct(")");
                }
                prev = item;
                continue;
            }
            break;
        }
    }

    // Returns the occurrence id of the parsed item (or -1 for joins in parens).
    int parse_from_item(Scope* scope) {
        if (at_punct("(")) {
            advance();
            if (at_word("SELECT") || at_word("WITH")) {
                parse_statement_body(scope);
                expect_punct(")");
                int id = add_occurrence("", true);
                bind_alias(scope, maybe_alias(), id);
                return id;
            }
            if (at_word("VALUES")) {
                // consume the VALUES rows up to our closing paren
                int depth = 1;
                while (depth > 0) {
                    if (cur().kind == TokKind::end) throw ParseFail{"unbalanced parenthesis in VALUES"};
                    if (at_punct("(")) ++depth;
                    if (at_punct(")")) --depth;
                    if (depth > 0) advance();
                }
                expect_punct(")");
                int id = add_occurrence("", true);
                bind_alias(scope, maybe_alias(), id);
                return id;
            }
            parse_from_list(scope);
            expect_punct(")");
            maybe_alias();
            return -1;
        }
        if (cur().kind != TokKind::word || (!cur().quoted && is_clause_boundary(cur())))
            throw ParseFail{"expected table reference near '" + cur().text + "'"};

        std::string name = cur().text;
        bool quoted = cur().quoted;
        advance();
        while (at_punct(".")) {
            advance();
            if (cur().kind != TokKind::word) throw ParseFail{"expected name after '.'"};
            name += "." + cur().text;
            advance();
        }
        if (at_punct("(")) { // table-valued function
            skip_balanced_parens();
            int id = add_occurrence("", true);
            bind_alias(scope, maybe_alias(), id);
            return id;
        }
        if (!quoted && scope->is_cte(to_lower(name))) {
            int id = add_occurrence("", true);
            std::string alias = maybe_alias();
            bind_alias(scope, alias.empty() ? name : alias, id);
            if (!alias.empty()) bind_name_if_free(scope, name, id);
            return id;
        }
        int id = add_occurrence(name, false);
        std::string alias = maybe_alias();
        if (!alias.empty()) {
            bind_alias(scope, alias, id);
            bind_name_if_free(scope, name, id);
        } else {
            bind_name_if_free(scope, name, id);
        }
        return id;
    }

    // [AS] alias; a bare word is an alias unless it starts the next clause.
    std::string maybe_alias() {
        if (at_word("AS")) {
            advance();
            if (cur().kind != TokKind::word) throw ParseFail{"expected alias after AS"};
            std::string a = cur().text;
            advance();
            if (at_punct("(")) skip_balanced_parens(); // derived column list
            return a;
        }
        if (cur().kind == TokKind::word && (cur().quoted || (!is_clause_boundary(cur()) &&
                                                             !is_join_keyword(cur()) &&
                                                             cur().upper != "ON" &&
                                                             cur().upper != "USING"))) {
            std::string a = cur().text;
            advance();
            if (at_punct("(")) skip_balanced_parens();
            return a;
        }
        return "";
    }

    void skip_balanced_parens() {
        expect_punct("(");
        int depth = 1;
        while (depth > 0) {
            if (cur().kind == TokKind::end) throw ParseFail{"unbalanced parenthesis"};
            if (at_punct("(")) ++depth;
            if (at_punct(")")) --depth;
            advance();
        }
    }

    // Consumes an expression region. Stop rules depend on context:
    //   clause:         a clause keyword (FROM, WHERE, GROUP, ...) at depth 0 ends it
    //   join_condition: additionally join keywords, ON, USING and ',' end it
    //   parenthesized:  only the matching ')' ends it
    // When `collect` is set, AND/OR-delimited runs of the exact shape
    //   col[.col] = col[.col]
    // are recorded as candidate join edges.
    void consume_expr(Scope* scope, bool collect, ExprContext ctx) {
        std::vector<Token> run;
        auto flush = [&]() {
            if (collect) record_atom(scope, run);
            run.clear();
        };
        while (true) {
            const Token& t = cur();
            if (t.kind == TokKind::end) break;
            if (t.kind == TokKind::punct && (t.text == ")" || t.text == ";")) break;
            if (ctx != ExprContext::parenthesized && t.kind == TokKind::word && !t.quoted &&
                is_clause_boundary(t))
                break;
            if (ctx == ExprContext::join_condition && t.kind == TokKind::word && !t.quoted &&
                (is_join_keyword(t) || t.upper == "ON" || t.upper == "USING"))
                break;
            if (ctx == ExprContext::join_condition && t.kind == TokKind::punct && t.text == ",")
                break;
            if (t.kind == TokKind::word && !t.quoted && (t.upper == "AND" || t.upper == "OR")) {
                flush();
                advance();
                continue;
            }
            if (t.kind == TokKind::punct && t.text == ",") {
                flush();
                advance();
                continue;
            }
            if (t.kind == TokKind::punct && t.text == "(") {
                run.clear(); // a parenthesized region makes the current run impure
                advance();
                if (at_word("SELECT") || at_word("WITH")) {
                    parse_statement_body(scope);
                } else {
                    consume_expr(scope, collect, ExprContext::parenthesized);
                }
                expect_punct(")");
                continue;
            }
            run.push_back(t);
            advance();
        }
        flush();
    }

    // col [. col] = col [. col]
    void record_atom(Scope* scope, const std::vector<Token>& run) {
        auto col_ref = [&](std::size_t at, std::string& qual, std::string& col) -> std::size_t {
            if (at >= run.size() || run[at].kind != TokKind::word) return 0;
            if (at + 2 < run.size() && run[at + 1].kind == TokKind::punct &&
                run[at + 1].text == "." && run[at + 2].kind == TokKind::word) {
                qual = run[at].text;
                col = run[at + 2].text;
                return 3;
            }
            qual.clear();
            col = run[at].text;
            return 1;
        };
        std::string lq, lc, rq, rc;
        std::size_t used = col_ref(0, lq, lc);
        if (used == 0) return;
        if (used >= run.size() || run[used].kind != TokKind::punct || run[used].text != "=") return;
        std::size_t used2 = col_ref(used + 1, rq, rc);
        if (used2 == 0 || used + 1 + used2 != run.size()) return;
        pending_.push_back({lq, lc, rq, rc, scope});
    }

    int add_occurrence(const std::string& table, bool virtual_source) {
        int id = static_cast<int>(occurrences_.size());
        occurrences_.push_back({id, table, virtual_source});
        if (!virtual_source) {
            std::string lowered = to_lower(table);
            if (!seen_tables_.count(lowered)) {
                seen_tables_.insert(lowered);
                referenced_.push_back(table);
            }
        }
        return id;
    }

    void bind_alias(Scope* scope, const std::string& alias, int id) {
        if (alias.empty()) return;
        scope->bindings[to_lower(alias)] = id;
    }

    void bind_name_if_free(Scope* scope, const std::string& name, int id) {
        std::string lowered = to_lower(name);
        if (!scope->bindings.count(lowered)) scope->bindings[lowered] = id;
    }

    void add_using_edge(int left_id, int right_id, const std::string& column) {
        if (left_id < 0 || right_id < 0) return;
        const Occurrence& l = occurrences_[left_id];
        const Occurrence& r = occurrences_[right_id];
        if (l.virtual_source || r.virtual_source || left_id == right_id) return;
        resolved_.push_back({l.table, column, r.table, column});
    }

    void resolve_edges(QueryAnalysis& out) {
        for (const PendingEdge& p : pending_) {
            if (p.left_qual.empty() || p.right_qual.empty()) continue;
            const int* li = p.scope->resolve(to_lower(p.left_qual));
            const int* ri = p.scope->resolve(to_lower(p.right_qual));
            if (!li || !ri || *li == *ri) continue;
            const Occurrence& l = occurrences_[*li];
            const Occurrence& r = occurrences_[*ri];
            if (l.virtual_source || r.virtual_source) continue;
            resolved_.push_back({l.table, p.left_col, r.table, p.right_col});
        }
        for (const JoinEdge& e : resolved_) {
            if (std::find(out.join_edges.begin(), out.join_edges.end(), e) == out.join_edges.end())
                out.join_edges.push_back(e);
        }
    }

    const std::vector<Token>& toks_;
    std::size_t pos_ = 0;
    std::vector<std::unique_ptr<Scope>> scopes_;
    std::vector<Occurrence> occurrences_;
    std::vector<PendingEdge> pending_;
    std::vector<JoinEdge> resolved_;
    std::vector<std::string> referenced_;
    std::unordered_set<std::string> seen_tables_;
};

} // namespace

bool QueryAnalysis::references(const std::string& table) const {
    std::string lowered = to_lower(table);
    return std::any_of(referenced_tables.begin(), referenced_tables.end(),
                       [&](const std::string& t) { return to_lower(t) == lowered; });
}

QueryAnalysis analyze_query(const std::string& sql) {
    try {
        std::vector<Token> tokens = lex::tokenize(sql);
        Analyzer analyzer(tokens);
        return analyzer.run();
    } catch (const ParseFail& f) {
        QueryAnalysis out;
        out.parse_ok = false;
        out.parse_error = f.message;
        return out;
    }
}

std::vector<std::string> tokenize_name(const std::string& name) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&]() {
        if (!current.empty()) {
            tokens.push_back(to_lower(current));
            current.clear();
        }
    };
    char prev = '\0';
    for (char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c))) { // '_' and any punctuation separate
            flush();
            prev = '\0';
            continue;
        }
        bool boundary = std::isupper(static_cast<unsigned char>(c)) &&
                        (std::islower(static_cast<unsigned char>(prev)) ||
                         std::isdigit(static_cast<unsigned char>(prev)));
        if (boundary) flush();
        current += c;
        prev = c;
    }
    flush();
    return tokens;
}

namespace {

struct MatchBlock {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t size = 0;
};

// Longest matching block in a[alo,ahi) x b[blo,bhi); among maximal blocks the
// one starting earliest in a, then earliest in b.
MatchBlock find_longest_match(const std::string& a, const std::string& b, std::size_t alo,
                              std::size_t ahi, std::size_t blo, std::size_t bhi,
                              const std::vector<std::vector<std::size_t>>& b2j) {
    MatchBlock best{alo, blo, 0};
    std::vector<std::size_t> j2len(b.size() + 1, 0), new_j2len(b.size() + 1, 0);
    for (std::size_t i = alo; i < ahi; ++i) {
        std::fill(new_j2len.begin(), new_j2len.end(), 0);
        for (std::size_t j : b2j[static_cast<unsigned char>(a[i])]) {
            if (j < blo) continue;
            if (j >= bhi) break;
            std::size_t k = (j > blo ? j2len[j - 1] : 0) + 1;
            new_j2len[j] = k;
            if (k > best.size) best = {i - k + 1, j - k + 1, k};
        }
        std::swap(j2len, new_j2len);
    }
    return best;
}

} // namespace

double structural_similarity(const std::string& candidate, const std::string& reference) {
    const std::string& a = candidate;
    const std::string& b = reference;
    const std::size_t total = a.size() + b.size();
    if (total == 0) return 1.0;

    std::vector<std::vector<std::size_t>> b2j(256);
    for (std::size_t j = 0; j < b.size(); ++j) b2j[static_cast<unsigned char>(b[j])].push_back(j);

    std::size_t matched = 0;
    std::vector<std::array<std::size_t, 4>> queue{{0, a.size(), 0, b.size()}};
    while (!queue.empty()) {
        auto [alo, ahi, blo, bhi] = queue.back();
        queue.pop_back();
        MatchBlock m = find_longest_match(a, b, alo, ahi, blo, bhi, b2j);
        if (m.size == 0) continue;
        matched += m.size;
        if (alo < m.a && blo < m.b) queue.push_back({alo, m.a, blo, m.b});
        if (m.a + m.size < ahi && m.b + m.size < bhi)
            queue.push_back({m.a + m.size, ahi, m.b + m.size, bhi});
    }
    return 2.0 * static_cast<double>(matched) / static_cast<double>(total);
}

} // namespace requery
