#include "requery/refinery.hpp"

#include "requery/errors.hpp"
#include "requery/prompts.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <iostream>
#include <mutex>

namespace requery {

namespace {

std::string quote_ident(const std::string& name) {
    std::string quoted = "\"";
    for (char c : name) {
        quoted += c;
        if (c == '"') quoted += c;
    }
    quoted += "\"";
    return quoted;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool fk_sanctions_edge(const TableSchema& left, const TableSchema& right,
                       const std::string& left_col, const std::string& right_col) {
    auto matches = [](const ForeignKey& fk, const TableSchema& from, const std::string& from_col,
                      const TableSchema& to, const std::string& to_col) {
        return lower(fk.from_table) == lower(from.prefixed_name) &&
               lower(fk.from_column) == lower(from_col) &&
               lower(fk.to_table) == lower(to.prefixed_name) &&
               lower(fk.to_column) == lower(to_col);
    };
    for (const ForeignKey& fk : left.foreign_keys)
        if (matches(fk, left, left_col, right, right_col)) return true;
    for (const ForeignKey& fk : right.foreign_keys)
        if (matches(fk, right, right_col, left, left_col)) return true;
    return false;
}

} // namespace

PruneVerdict prune(const RewriteCandidate& candidate, const Catalog& catalog) {
    PruneVerdict verdict;
    QueryAnalysis analysis = analyze_query(candidate.sql);
    if (!analysis.parse_ok) return verdict; // correction deals with it

    for (const JoinEdge& edge : analysis.join_edges) {
        const TableSchema* left = catalog.find(edge.left_table);
        const TableSchema* right = catalog.find(edge.right_table);
        if (!left || !right) continue; // unknown tables fail executability instead
        if (left->db_id == right->db_id) {
            if (!fk_sanctions_edge(*left, *right, edge.left_column, edge.right_column))
                std::cerr << "[prune] warning: same-database join without declared foreign key: "
                          << edge.left_table << "." << edge.left_column << " = " << edge.right_table
                          << "." << edge.right_column << "\n";
            continue;
        }
        if (!fk_sanctions_edge(*left, *right, edge.left_column, edge.right_column))
            verdict.offending_edges.push_back(edge);
    }
    verdict.pruned = !verdict.offending_edges.empty();
    return verdict;
}

// ---------------------------------------------------------------------------
// ExecutionBackend

struct ExecutionBackend::Impl {
    sqlite3* db = nullptr;
    mutable std::mutex mutex; // sqlite connections are not thread-safe per handle
    std::size_t instantiated = 0;
    std::vector<std::string> skipped;

    ~Impl() {
        if (db) sqlite3_close(db);
    }
};

ExecutionBackend::ExecutionBackend() : impl_(std::make_unique<Impl>()) {
    if (sqlite3_open(":memory:", &impl_->db) != SQLITE_OK)
        throw Error("cannot open in-memory database");
}

ExecutionBackend::~ExecutionBackend() = default;
ExecutionBackend::ExecutionBackend(ExecutionBackend&&) noexcept = default;
ExecutionBackend& ExecutionBackend::operator=(ExecutionBackend&&) noexcept = default;

std::size_t ExecutionBackend::instantiated_count() const { return impl_->instantiated; }

const std::vector<std::string>& ExecutionBackend::skipped_tables() const { return impl_->skipped; }

ExecutionBackend::ExecResult ExecutionBackend::check_executable(const std::string& sql) const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    const char* tail = sql.c_str();
    const char* end = tail + sql.size();
    bool prepared_any = false;
    while (tail < end) {
        sqlite3_stmt* stmt = nullptr;
        const char* next = nullptr;
        int rc = sqlite3_prepare_v2(impl_->db, tail, static_cast<int>(end - tail), &stmt, &next);
        if (rc != SQLITE_OK) {
            std::string message = sqlite3_errmsg(impl_->db);
            if (stmt) sqlite3_finalize(stmt);
            return {false, message};
        }
        if (!stmt) { // trailing whitespace or comment
            tail = next;
            if (!next || next == tail) break;
            continue;
        }
        prepared_any = true;
        int steps = 0;
        while ((rc = sqlite3_step(stmt)) == SQLITE_ROW && ++steps < 10000) {
        }
        if (rc != SQLITE_DONE && rc != SQLITE_ROW) {
            std::string message = sqlite3_errmsg(impl_->db);
            sqlite3_finalize(stmt);
            return {false, message};
        }
        sqlite3_finalize(stmt);
        tail = next;
    }
    if (!prepared_any) return {false, "not a SQL statement"};
    return {true, ""};
}

ExecutionBackend instantiate_schemas(const Catalog& catalog) {
    ExecutionBackend backend;
    for (const std::string& name : catalog.table_names()) {
        const TableSchema* table = catalog.find(name);
        std::string ddl = "CREATE TABLE IF NOT EXISTS " + quote_ident(table->prefixed_name) + " (";
        std::vector<const ColumnDef*> pk;
        for (const ColumnDef& col : table->columns)
            if (col.is_primary_key) pk.push_back(&col);
        for (std::size_t i = 0; i < table->columns.size(); ++i) {
            const ColumnDef& col = table->columns[i];
            if (i) ddl += ", ";
            ddl += quote_ident(col.name);
            if (!col.sql_type.empty()) ddl += " " + col.sql_type;
            if (col.is_primary_key && pk.size() == 1) ddl += " PRIMARY KEY";
        }
        if (pk.size() > 1) {
            ddl += ", PRIMARY KEY (";
            for (std::size_t i = 0; i < pk.size(); ++i) {
                if (i) ddl += ", ";
                ddl += quote_ident(pk[i]->name);
            }
            ddl += ")";
        }
        ddl += ")";

        std::lock_guard<std::mutex> lock(backend.impl_->mutex);
        char* err = nullptr;
        if (sqlite3_exec(backend.impl_->db, ddl.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            backend.impl_->skipped.push_back(table->prefixed_name);
            std::cerr << "[backend] skipping table " << table->prefixed_name << ": "
                      << (err ? err : "unknown error") << "\n";
            sqlite3_free(err);
        } else {
            ++backend.impl_->instantiated;
        }
    }
    return backend;
}

namespace {

std::string corrected_sql_from_response(const std::string& response) {
    std::vector<std::string> parsed = parse_rewrite_response(response);
    if (!parsed.empty()) return parsed.front();
    // no recognizable SQL; pass the raw text through and let the next
    // executability check report it
    std::string trimmed = response;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
        trimmed.pop_back();
    std::size_t begin = 0;
    while (begin < trimmed.size() && std::isspace(static_cast<unsigned char>(trimmed[begin])))
        ++begin;
    return trimmed.substr(begin);
}

std::string schema_block_for(const std::string& sql, const Catalog& catalog,
                             const std::vector<std::string>& fallback_tables) {
    QueryAnalysis analysis = analyze_query(sql);
    std::vector<std::string> tables;
    if (analysis.parse_ok) {
        for (const std::string& name : analysis.referenced_tables) {
            const TableSchema* schema = catalog.find(name);
            if (schema) tables.push_back(schema->prefixed_name);
        }
    }
    if (tables.empty()) tables = fallback_tables;
    return serialize_for_prompt(catalog, tables);
}

} // namespace

CorrectionTrace correct(const RewriteCandidate& candidate, const Catalog& catalog,
                        const ExecutionBackend& backend, LlmGateway& gate,
                        const LlmModelSpec& spec, const std::vector<std::string>& fallback_tables) {
    constexpr int kMaxIterations = 3;

    CorrectionTrace trace;
    trace.final_sql = candidate.sql;

    ExecutionBackend::ExecResult res = backend.check_executable(trace.final_sql);
    if (res.ok) {
        trace.corrected = true;
        return trace; // zero iterations, no LLM calls
    }

    while (true) {
        trace.attempts.push_back({trace.final_sql, res.error_message});
        if (trace.iterations_used >= kMaxIterations) break;

        std::string tables = schema_block_for(trace.final_sql, catalog, fallback_tables);
        std::string prompt = prompts::render_correction(trace.final_sql, tables, res.error_message);
        LlmExchange exchange;
        try {
            exchange = gate.complete(spec, prompt);
        } catch (const ReplayMissError&) {
            throw; // a missing fixture is a setup defect, not an uncorrectable query
        } catch (const LlmError& e) {
            std::cerr << "[correct] LLM failure mid-loop: " << e.what() << "\n";
            return trace; // uncorrectable, trace carries the history so far
        }
        ++trace.iterations_used;
        trace.final_sql = corrected_sql_from_response(exchange.response);

        res = backend.check_executable(trace.final_sql);
        if (res.ok) {
            trace.corrected = true;
            break;
        }
    }

    // corrected may never stand on SQL the backend rejects
    if (trace.corrected && !backend.check_executable(trace.final_sql).ok) trace.corrected = false;
    return trace;
}

} // namespace requery
