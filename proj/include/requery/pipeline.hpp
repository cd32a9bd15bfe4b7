#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "requery/filters.hpp"
#include "requery/llmgate.hpp"
#include "requery/ranker.hpp"
#include "requery/refinery.hpp"
#include "requery/rewriters.hpp"

namespace requery {

enum class RewriterStrategy { simple, nl };
enum class LlmMode { live, record, replay };

struct PipelineConfig {
    FilterConfig filter;
    RewriterStrategy rewriter = RewriterStrategy::nl;
    int n = 5;
    RankingConfig ranking;
    LlmMode llm_mode = LlmMode::live;
    LlmModelSpec model;
    std::filesystem::path catalog_dir;
    std::filesystem::path vectors_path;
    std::filesystem::path fixture_path; // required in record/replay mode
};

struct RankedEntry {
    ScoredRewrite scored;
    CorrectionTrace correction;
};

struct PrunedEntry {
    RewriteCandidate candidate;
    PruneVerdict verdict;
};

struct PipelineReport {
    std::string query;
    std::string status; // "ok" or "no usable tables"
    FilterResult filter_tables;
    int raw_candidates = 0;
    int pruned = 0;
    int uncorrectable = 0;
    std::vector<RankedEntry> ranked;
    std::vector<PrunedEntry> pruned_entries;
    std::vector<CorrectionTrace> uncorrectable_entries;
    CostReport cost;
    std::vector<std::pair<std::string, double>> phase_timings_ms;
};

// Filter -> rewrite -> prune -> correct -> rank. An empty filter result
// short-circuits with status "no usable tables". Stage-fatal errors raise
// PipelineError naming the stage.
PipelineReport run(const std::string& query, const PipelineConfig& cfg);

// As above, with preloaded inputs and a caller-supplied gateway (tests and
// the fixture recorder inject scripted transports this way).
PipelineReport run(const std::string& query, const PipelineConfig& cfg, const Catalog& catalog,
                   const VectorStore& vectors, LlmGateway& gate);

// JSON form of the report. Timings land in a separate top-level "timings"
// object so determinism checks can exclude them.
std::string report_to_json(const PipelineReport& report, int indent = 2);

int cli_main(int argc, char** argv);

} // namespace requery
