#pragma once

#include <string>
#include <vector>

#include "requery/catalog.hpp"
#include "requery/embedkit.hpp"
#include "requery/llmgate.hpp"
#include "requery/rewriters.hpp"

namespace requery {

enum class SimilarityMeasure { embedding, llm };
enum class RankingAlgorithm { intent, mmr };

struct RankingConfig {
    SimilarityMeasure similarity = SimilarityMeasure::llm;
    RankingAlgorithm algorithm = RankingAlgorithm::mmr;
    double lambda = 0.7;    // MMR trade-off between intent and structural dissimilarity
    int llm_batch_size = 5; // rewrites per scoring call
};

struct ScoredRewrite {
    RewriteCandidate candidate;
    double intent_score = 0.0; // clamped to [0,1]
    int rank = 0;              // 1-based final position
};

// Mean pairwise cosine between name embeddings of the tables of the original
// query and of the rewrite; negative cosines clamp to 0. Either table set
// empty (or unparseable SQL) scores 0.
double embedding_intent_similarity(const std::string& original, const std::string& rewrite,
                                   const Catalog& catalog, const VectorStore& store);

// Batched LLM scoring. A batch whose response does not parse into exactly
// one value per rewrite is re-issued once, then scored 0.0 with a warning.
// Values are clamped to [0,1]; output order matches input order.
std::vector<double> llm_intent_similarity(const std::string& original,
                                          const std::vector<std::string>& rewrites,
                                          LlmGateway& gate, const LlmModelSpec& spec,
                                          const RankingConfig& cfg);

// Stable descending sort by intent score; ties keep input order.
std::vector<ScoredRewrite> rank_intent(
    const std::vector<std::pair<RewriteCandidate, double>>& scored);

// Greedy maximal-marginal-relevance ordering: the first pick maximizes the
// intent score; each following pick maximizes
//   lambda * intent(c) - (1-lambda) * max over selected s of structural_similarity(c.sql, s.sql).
// Ties go to the earliest candidate.
std::vector<ScoredRewrite> rank_mmr(const std::vector<std::pair<RewriteCandidate, double>>& scored,
                                    const RankingConfig& cfg);

} // namespace requery
