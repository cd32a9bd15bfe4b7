#include "requery/pipeline.hpp"

#include "requery/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <chrono>
#include <fstream>
#include <iostream>

namespace requery {

using nlohmann::json;

namespace {

class StageTimer {
public:
    explicit StageTimer(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}

    template <typename F>
    auto time(const std::string& stage, F&& f) {
        auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            record(stage, start);
        } else {
            auto result = f();
            record(stage, start);
            return result;
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
        auto elapsed = std::chrono::steady_clock::now() - start;
        sink_.emplace_back(stage,
                           std::chrono::duration<double, std::milli>(elapsed).count());
    }

    std::vector<std::pair<std::string, double>>& sink_;
};

const char* origin_name(RewriteOrigin origin) {
    return origin == RewriteOrigin::simple ? "simple" : "nl";
}

LlmGateway build_gateway(const PipelineConfig& cfg) {
    switch (cfg.llm_mode) {
    case LlmMode::live:
        return LlmGateway::live(http_transport_from_env());
    case LlmMode::record:
        if (cfg.fixture_path.empty())
            throw PipelineError("llm", "record mode needs a fixture path");
        return LlmGateway::record(cfg.fixture_path, http_transport_from_env());
    case LlmMode::replay:
        if (cfg.fixture_path.empty())
            throw PipelineError("llm", "replay mode needs a fixture path");
        return LlmGateway::replay(cfg.fixture_path);
    }
    throw PipelineError("llm", "unknown llm mode");
}

} // namespace

PipelineReport run(const std::string& query, const PipelineConfig& cfg) {
    Catalog catalog;
    VectorStore vectors;
    try {
        catalog = load_catalog(cfg.catalog_dir);
    } catch (const Error& e) {
        throw PipelineError("catalog", e.what());
    }
    try {
        if (!cfg.vectors_path.empty()) vectors = load_vectors(cfg.vectors_path);
    } catch (const Error& e) {
        throw PipelineError("vectors", e.what());
    }
    try {
        LlmGateway gate = build_gateway(cfg);
        return run(query, cfg, catalog, vectors, gate);
    } catch (const PipelineError&) {
        throw;
    } catch (const LlmError& e) {
        throw PipelineError("llm", e.what());
    }
}

namespace {

void validate(const PipelineConfig& cfg) {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(cfg.filter.epsilon)) throw PipelineError("config", "epsilon must be in [0,1]");
    if (!in_unit(cfg.filter.gamma)) throw PipelineError("config", "gamma must be in [0,1]");
    if (cfg.filter.expected_return_fraction <= 0.0 || cfg.filter.expected_return_fraction > 1.0)
        throw PipelineError("config", "expected_return_fraction must be in (0,1]");
    if (!in_unit(cfg.ranking.lambda)) throw PipelineError("config", "lambda must be in [0,1]");
    if (cfg.ranking.llm_batch_size < 1)
        throw PipelineError("config", "llm_batch_size must be at least 1");
    if (cfg.n < 1) throw PipelineError("config", "n must be at least 1");
    if (cfg.model.max_output_tokens >= cfg.model.context_window)
        throw PipelineError("config", "max_output_tokens must be below the context window");
    if (cfg.model.input_price_per_1m < 0.0 || cfg.model.output_price_per_1m < 0.0)
        throw PipelineError("config", "token prices must be non-negative");
}

struct RefinedCandidate {
    RewriteCandidate candidate;
    CorrectionTrace trace;
};

void rank_survivors(const std::string& query, const PipelineConfig& cfg, const Catalog& catalog,
                    const VectorStore& vectors, LlmGateway& gate,
                    const std::vector<RefinedCandidate>& refined, PipelineReport& report) {
    if (refined.empty()) return;
    std::vector<std::pair<RewriteCandidate, double>> scored;
    scored.reserve(refined.size());
    for (const RefinedCandidate& r : refined) {
        RewriteCandidate presented = r.candidate;
        presented.sql = r.trace.final_sql;
        scored.emplace_back(std::move(presented), 0.0);
    }
    if (cfg.ranking.similarity == SimilarityMeasure::embedding) {
        for (auto& [candidate, score] : scored)
            score = embedding_intent_similarity(query, candidate.sql, catalog, vectors);
    } else {
        std::vector<std::string> sqls;
        for (const auto& [candidate, score] : scored) sqls.push_back(candidate.sql);
        std::vector<double> scores =
            llm_intent_similarity(query, sqls, gate, cfg.model, cfg.ranking);
        for (std::size_t i = 0; i < scored.size(); ++i) scored[i].second = scores[i];
    }
    std::vector<ScoredRewrite> ranked = cfg.ranking.algorithm == RankingAlgorithm::mmr
                                            ? rank_mmr(scored, cfg.ranking)
                                            : rank_intent(scored);
    // batch_index identifies the candidate; the trace travels with it
    for (ScoredRewrite& s : ranked) {
        for (const RefinedCandidate& r : refined) {
            if (r.candidate.batch_index == s.candidate.batch_index) {
                report.ranked.push_back({std::move(s), r.trace});
                break;
            }
        }
    }
}

} // namespace

PipelineReport run(const std::string& query, const PipelineConfig& cfg, const Catalog& catalog,
                   const VectorStore& vectors, LlmGateway& gate) {
    if (query.empty()) throw PipelineError("input", "empty query");
    validate(cfg);

    PipelineReport report;
    report.query = query;
    report.status = "ok";
    StageTimer timer(report.phase_timings_ms);

    // phase 1: table filtering
    report.filter_tables = timer.time("filter", [&]() -> FilterResult {
        try {
            switch (cfg.filter.strategy) {
            case FilterStrategy::embedding: {
                QueryAnalysis analysis = analyze_query(query);
                if (!analysis.parse_ok)
                    throw Error("query does not parse: " + analysis.parse_error);
                return embedding_filter(catalog, analysis, vectors, cfg.filter);
            }
            case FilterStrategy::simple_llm:
                return simple_llm_filter(catalog, query, gate, cfg.model, cfg.filter);
            case FilterStrategy::complex_llm:
                return complex_llm_filter(catalog, query, gate, cfg.model, vectors, cfg.filter);
            }
            throw Error("unknown filter strategy");
        } catch (const Error& e) {
            throw PipelineError("filter", e.what());
        }
    });

    if (report.filter_tables.relevant_tables.empty()) {
        report.status = "no usable tables";
        report.cost = accumulate_cost(cfg.model, gate.log());
        return report;
    }

    // phase 1: rewrite generation
    RewriteRequest request;
    request.original_query = query;
    request.allowed_tables = report.filter_tables.relevant_tables;
    request.n = cfg.n;
    std::vector<RewriteCandidate> candidates =
        timer.time("rewrite", [&]() -> std::vector<RewriteCandidate> {
            try {
                return cfg.rewriter == RewriterStrategy::simple
                           ? simple_rewrite(request, catalog, gate, cfg.model)
                           : nl_rewrite(request, catalog, gate, cfg.model);
            } catch (const Error& e) {
                throw PipelineError("rewrite", e.what());
            }
        });
    report.raw_candidates = static_cast<int>(candidates.size());

    // phase 2: prune cross-database joins
    std::vector<RewriteCandidate> survivors;
    timer.time("prune", [&]() {
        for (RewriteCandidate& candidate : candidates) {
            PruneVerdict verdict = prune(candidate, catalog);
            if (verdict.pruned) {
                candidate.state = CandidateState::pruned;
                report.pruned_entries.push_back({candidate, std::move(verdict)});
            } else {
                candidate.state = CandidateState::kept;
                survivors.push_back(candidate);
            }
        }
    });
    report.pruned = static_cast<int>(report.pruned_entries.size());

    // phase 2: executability checks and the correction loop
    std::vector<RefinedCandidate> refined =
        timer.time("correct", [&]() -> std::vector<RefinedCandidate> {
        try {
            ExecutionBackend backend = instantiate_schemas(catalog);
            std::vector<RefinedCandidate> out;
            for (RewriteCandidate& candidate : survivors) {
                CorrectionTrace trace = correct(candidate, catalog, backend, gate, cfg.model,
                                                report.filter_tables.relevant_tables);
                if (trace.corrected) {
                    candidate.state = trace.iterations_used == 0 ? CandidateState::kept
                                                                 : CandidateState::corrected;
                    out.push_back({candidate, std::move(trace)});
                } else {
                    candidate.state = CandidateState::uncorrectable;
                    report.uncorrectable_entries.push_back(std::move(trace));
                }
            }
            return out;
        } catch (const PipelineError&) {
            throw;
        } catch (const Error& e) {
            throw PipelineError("correct", e.what());
        }
    });
    report.uncorrectable = static_cast<int>(report.uncorrectable_entries.size());

    // phase 2: intent scoring and ranking over the final SQL of each survivor
    timer.time("rank", [&]() {
        try {
            rank_survivors(query, cfg, catalog, vectors, gate, refined, report);
        } catch (const PipelineError&) {
            throw;
        } catch (const Error& e) {
            throw PipelineError("rank", e.what());
        }
    });

    report.cost = accumulate_cost(cfg.model, gate.log());
    return report;
}

std::string report_to_json(const PipelineReport& report, int indent) {
    json j;
    j["query"] = report.query;
    j["status"] = report.status;

    json filter;
    filter["tables"] = report.filter_tables.relevant_tables;
    json exchanges = json::array();
    for (const LlmExchange& e : report.filter_tables.exchanges) {
        exchanges.push_back({{"digest", e.prompt_digest},
                             {"input_tokens", e.input_tokens},
                             {"output_tokens", e.output_tokens},
                             {"backend", e.backend == LlmBackend::replay ? "replay" : "live"}});
    }
    filter["exchanges"] = exchanges;
    j["filter"] = filter;

    j["counts"] = {{"raw_candidates", report.raw_candidates},
                   {"pruned", report.pruned},
                   {"uncorrectable", report.uncorrectable},
                   {"ranked", report.ranked.size()}};

    json ranked = json::array();
    for (const RankedEntry& entry : report.ranked) {
        json attempts = json::array();
        for (const CorrectionAttempt& a : entry.correction.attempts)
            attempts.push_back({{"sql", a.sql}, {"error", a.error_message}});
        ranked.push_back({{"rank", entry.scored.rank},
                          {"sql", entry.correction.final_sql},
                          {"intent_score", entry.scored.intent_score},
                          {"origin", origin_name(entry.scored.candidate.origin)},
                          {"correction",
                           {{"corrected", entry.correction.corrected},
                            {"iterations_used", entry.correction.iterations_used},
                            {"attempts", attempts}}}});
    }
    j["ranked"] = ranked;

    json pruned = json::array();
    for (const PrunedEntry& entry : report.pruned_entries) {
        json edges = json::array();
        for (const JoinEdge& e : entry.verdict.offending_edges)
            edges.push_back({{"left_table", e.left_table},
                             {"left_column", e.left_column},
                             {"right_table", e.right_table},
                             {"right_column", e.right_column}});
        pruned.push_back({{"sql", entry.candidate.sql}, {"offending_edges", edges}});
    }
    j["pruned"] = pruned;

    json uncorrectable = json::array();
    for (const CorrectionTrace& trace : report.uncorrectable_entries) {
        json attempts = json::array();
        for (const CorrectionAttempt& a : trace.attempts)
            attempts.push_back({{"sql", a.sql}, {"error", a.error_message}});
        uncorrectable.push_back({{"final_sql", trace.final_sql},
                                 {"iterations_used", trace.iterations_used},
                                 {"attempts", attempts}});
    }
    j["uncorrectable"] = uncorrectable;

    j["cost"] = {{"input_tokens", report.cost.total_input_tokens},
                 {"output_tokens", report.cost.total_output_tokens},
                 {"total_dollars", report.cost.total_cost_dollars}};

    json timings;
    for (const auto& [stage, ms] : report.phase_timings_ms) timings[stage + "_ms"] = ms;
    j["timings"] = timings;

    return j.dump(indent);
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Intent-preserving SQL query rewriting over an available table catalog"};

    std::string query, query_file, out_path;
    std::string filter = "cllm", rewriter = "nl", ranker = "mmr", similarity = "llm";
    std::string llm_mode = "live", fixtures, catalog_dir, vectors_path;
    PipelineConfig cfg;

    app.add_option("--query", query, "SQL query to rewrite");
    app.add_option("--query-file", query_file, "file containing the SQL query");
    app.add_option("--catalog-dir", catalog_dir, "directory of .sql DDL files")->required();
    app.add_option("--vectors", vectors_path, "word vector file");
    app.add_option("--filter", filter, "table filter: embedding|sllm|cllm")
        ->check(CLI::IsMember({"embedding", "sllm", "cllm"}));
    app.add_option("--rewriter", rewriter, "rewrite strategy: simple|nl")
        ->check(CLI::IsMember({"simple", "nl"}));
    app.add_option("--ranker", ranker, "ranking algorithm: intent|mmr")
        ->check(CLI::IsMember({"intent", "mmr"}));
    app.add_option("--similarity", similarity, "intent similarity: embedding|llm")
        ->check(CLI::IsMember({"embedding", "llm"}));
    app.add_option("--n", cfg.n, "number of requested rewrites")->check(CLI::PositiveNumber);
    app.add_option("--epsilon", cfg.filter.epsilon, "embedding filter threshold");
    app.add_option("--gamma", cfg.filter.gamma, "complex filter threshold");
    app.add_option("--lambda", cfg.ranking.lambda, "MMR trade-off weight");
    app.add_option("--llm-mode", llm_mode, "live|record|replay")
        ->check(CLI::IsMember({"live", "record", "replay"}));
    app.add_option("--fixtures", fixtures, "fixture file for record/replay");
    app.add_option("--out", out_path, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints usage, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (query.empty() == query_file.empty()) {
        std::cerr << "exactly one of --query or --query-file is required\n";
        return 2;
    }
    if (!query_file.empty()) {
        std::ifstream in(query_file);
        if (!in) {
            std::cerr << "cannot open query file: " << query_file << "\n";
            return 2;
        }
        query.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        while (!query.empty() && std::isspace(static_cast<unsigned char>(query.back())))
            query.pop_back();
    }

    cfg.filter.strategy = filter == "embedding" ? FilterStrategy::embedding
                          : filter == "sllm"    ? FilterStrategy::simple_llm
                                                : FilterStrategy::complex_llm;
    cfg.rewriter = rewriter == "simple" ? RewriterStrategy::simple : RewriterStrategy::nl;
    cfg.ranking.algorithm = ranker == "intent" ? RankingAlgorithm::intent : RankingAlgorithm::mmr;
    cfg.ranking.similarity =
        similarity == "embedding" ? SimilarityMeasure::embedding : SimilarityMeasure::llm;
    cfg.llm_mode = llm_mode == "live"     ? LlmMode::live
                   : llm_mode == "record" ? LlmMode::record
                                          : LlmMode::replay;
    cfg.fixture_path = fixtures;
    cfg.catalog_dir = catalog_dir;
    cfg.vectors_path = vectors_path;

    try {
        PipelineReport report = run(query, cfg);
        std::string out = report_to_json(report);
        if (out_path.empty()) {
            std::cout << out << "\n";
        } else {
            std::ofstream file(out_path);
            if (!file) {
                std::cerr << "cannot write report: " << out_path << "\n";
                return 1;
            }
            file << out << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace requery
