#pragma once

#include <memory>
#include <string>
#include <vector>

#include "requery/catalog.hpp"
#include "requery/llmgate.hpp"
#include "requery/rewriters.hpp"
#include "requery/sqlkit.hpp"

namespace requery {

struct PruneVerdict {
    bool pruned = false;
    std::vector<JoinEdge> offending_edges;
};

// A join edge is offending when its tables come from different source
// databases and no declared foreign key connects the two columns in either
// direction. Unparseable SQL is never pruned here; it goes to correction.
PruneVerdict prune(const RewriteCandidate& candidate, const Catalog& catalog);

// In-memory SQL engine holding every catalog table, empty. Used to decide
// executability and to harvest error messages for the correction loop.
class ExecutionBackend {
public:
    ExecutionBackend();
    ~ExecutionBackend();
    ExecutionBackend(ExecutionBackend&&) noexcept;
    ExecutionBackend& operator=(ExecutionBackend&&) noexcept;
    ExecutionBackend(const ExecutionBackend&) = delete;
    ExecutionBackend& operator=(const ExecutionBackend&) = delete;

    std::size_t instantiated_count() const;
    const std::vector<std::string>& skipped_tables() const;

    struct ExecResult {
        bool ok = false;
        std::string error_message; // engine text, verbatim
    };

    // Prepares and executes every statement in `sql` against the empty
    // schemas. Result rows are irrelevant; only executability matters.
    ExecResult check_executable(const std::string& sql) const;

private:
    friend ExecutionBackend instantiate_schemas(const Catalog& catalog);

    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Creates every catalog table, empty, in an embedded engine. Tables the
// engine rejects are skipped with a warning and recorded on the backend.
ExecutionBackend instantiate_schemas(const Catalog& catalog);

struct CorrectionAttempt {
    std::string sql;
    std::string error_message;
};

struct CorrectionTrace {
    std::vector<CorrectionAttempt> attempts; // every failed executability check
    std::string final_sql;
    bool corrected = false;
    int iterations_used = 0; // LLM calls, 0..3
};

// Iterative repair driven by the engine's verbatim error messages, capped at
// 3 LLM calls. corrected=true is only reported after the final SQL passes a
// re-check.
CorrectionTrace correct(const RewriteCandidate& candidate, const Catalog& catalog,
                        const ExecutionBackend& backend, LlmGateway& gate,
                        const LlmModelSpec& spec,
                        const std::vector<std::string>& fallback_tables = {});

} // namespace requery
