#include "requery/ranker.hpp"

#include "requery/errors.hpp"
#include "requery/prompts.hpp"
#include "requery/sqlkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <optional>

namespace requery {

namespace {

double clamp_unit(double v) {
    if (std::isnan(v)) return 0.0;
    return std::clamp(v, 0.0, 1.0);
}

std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

// "0.9; 0.4; 1.0" -> values, or nullopt when any field fails to parse
std::optional<std::vector<double>> parse_scores(const std::string& response) {
    std::vector<double> out;
    std::size_t begin = 0;
    while (begin <= response.size()) {
        std::size_t end = response.find(';', begin);
        if (end == std::string::npos) end = response.size();
        std::string field = trim(response.substr(begin, end - begin));
        begin = end + 1;
        if (field.empty()) continue;
        const char* start = field.c_str();
        char* parsed_end = nullptr;
        double v = std::strtod(start, &parsed_end);
        if (parsed_end != start + field.size() || std::isnan(v)) return std::nullopt;
        out.push_back(clamp_unit(v));
    }
    return out;
}

} // namespace

double embedding_intent_similarity(const std::string& original, const std::string& rewrite,
                                   const Catalog& catalog, const VectorStore& store) {
    QueryAnalysis original_analysis = analyze_query(original);
    QueryAnalysis rewrite_analysis = analyze_query(rewrite);
    if (!original_analysis.parse_ok || !rewrite_analysis.parse_ok) return 0.0;
    if (original_analysis.referenced_tables.empty() || rewrite_analysis.referenced_tables.empty())
        return 0.0;

    std::vector<NameEmbedding> original_embeddings;
    for (const std::string& name : original_analysis.referenced_tables)
        original_embeddings.push_back(store.embed_name(name)); // may be off-catalog names

    double sum = 0.0;
    std::size_t pairs = 0;
    for (const std::string& raw_name : rewrite_analysis.referenced_tables) {
        const TableSchema* schema = catalog.find(raw_name);
        NameEmbedding rewrite_embedding =
            store.embed_name(schema ? schema->prefixed_name : raw_name);
        for (const NameEmbedding& original_embedding : original_embeddings) {
            sum += std::max(0.0, cosine(rewrite_embedding, original_embedding));
            ++pairs;
        }
    }
    return pairs == 0 ? 0.0 : clamp_unit(sum / static_cast<double>(pairs));
}

std::vector<double> llm_intent_similarity(const std::string& original,
                                          const std::vector<std::string>& rewrites,
                                          LlmGateway& gate, const LlmModelSpec& spec,
                                          const RankingConfig& cfg) {
    if (rewrites.empty()) throw Error("llm_intent_similarity needs at least one rewrite");

    std::vector<double> scores;
    const std::size_t batch_size = static_cast<std::size_t>(std::max(1, cfg.llm_batch_size));
    for (std::size_t begin = 0; begin < rewrites.size(); begin += batch_size) {
        const std::size_t count = std::min(batch_size, rewrites.size() - begin);
        std::string alternatives;
        for (std::size_t i = 0; i < count; ++i) {
            if (i) alternatives += ";\n";
            alternatives += rewrites[begin + i];
        }
        std::string prompt = prompts::render_similarity(original, alternatives);

        std::optional<std::vector<double>> batch;
        for (int attempt = 0; attempt < 2 && !batch; ++attempt) {
            try {
                auto parsed = parse_scores(gate.complete(spec, prompt).response);
                if (parsed && parsed->size() == count) batch = std::move(parsed);
            } catch (const ReplayMissError&) {
                throw; // a missing fixture is a setup defect, not a degraded batch
            } catch (const LlmError& e) {
                std::cerr << "[ranker] similarity call failed: " << e.what() << "\n";
            }
        }
        if (batch) {
            scores.insert(scores.end(), batch->begin(), batch->end());
        } else {
            std::cerr << "[ranker] scoring batch failed twice; assigning 0.0 to " << count
                      << " rewrites\n";
            scores.insert(scores.end(), count, 0.0);
        }
    }
    return scores;
}

std::vector<ScoredRewrite> rank_intent(
    const std::vector<std::pair<RewriteCandidate, double>>& scored) {
    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return clamp_unit(scored[a].second) > clamp_unit(scored[b].second);
    });

    std::vector<ScoredRewrite> out;
    out.reserve(scored.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        ScoredRewrite s;
        s.candidate = scored[order[i]].first;
        s.intent_score = clamp_unit(scored[order[i]].second);
        s.rank = static_cast<int>(i) + 1;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ScoredRewrite> rank_mmr(const std::vector<std::pair<RewriteCandidate, double>>& scored,
                                    const RankingConfig& cfg) {
    const std::size_t n = scored.size();
    std::vector<bool> selected(n, false);
    std::vector<std::size_t> selection;
    selection.reserve(n);

    while (selection.size() < n) {
        std::size_t best = n;
        double best_score = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (selected[i]) continue;
            double score;
            if (selection.empty()) {
                score = clamp_unit(scored[i].second);
            } else {
                double max_struct = 0.0;
                for (std::size_t s : selection)
                    max_struct = std::max(max_struct, structural_similarity(
                                                          scored[i].first.sql, scored[s].first.sql));
                score = cfg.lambda * clamp_unit(scored[i].second) -
                        (1.0 - cfg.lambda) * max_struct;
            }
            if (best == n || score > best_score) { // ties keep the earliest candidate
                best = i;
                best_score = score;
            }
        }
        selected[best] = true;
        selection.push_back(best);
    }

    std::vector<ScoredRewrite> out;
    out.reserve(n);
    for (std::size_t i = 0; i < selection.size(); ++i) {
        ScoredRewrite s;
        s.candidate = scored[selection[i]].first;
        s.intent_score = clamp_unit(scored[selection[i]].second);
        s.rank = static_cast<int>(i) + 1;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace requery
