#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rankvec/corpus.hpp"
#include "rankvec/encoder.hpp"
#include "rankvec/rank.hpp"

namespace rankvec {

struct ScoredPair {
  Sentence s1;
  Sentence s2;
  double gold = 0.0;             // dataset's native scale
  double gold_normalized = 0.0;  // gold / scale, in [0, 1]
  std::optional<double> predicted;
};

inline constexpr double kDefaultLambdaInf = 0.1;
inline constexpr double kDefaultGoldScale = 5.0;

struct InferenceConfig {
  double lambda_inf = kDefaultLambdaInf;
  void validate() const;  // 0 <= lambda_inf <= 1
};

// TSV rows "sentence1<TAB>sentence2<TAB>gold". Gold is divided by `scale`
// and must land in [0, 1]. With require_gold = false a two-column row is
// accepted and its gold left at 0. Sentence ids run 0, 1, 2, ... over s1, s2
// of row 0, then row 1, and so on.
std::vector<ScoredPair> load_pairs(const std::filesystem::path& path,
                                   double scale = kDefaultGoldScale,
                                   bool require_gold = true);
void write_pairs(const std::vector<ScoredPair>& pairs, std::ostream& out);

// lambda * rank_sim + (1 - lambda) * cos_sim
double blend_similarity(double rank_sim, double cos_sim, double lambda_inf);

// Scores sentence pairs against an index built by the same encoder.
class RankModel {
 public:
  // Throws DataError on an encoder/index fingerprint mismatch.
  RankModel(const CorpusIndex& index, const Encoder& encoder);

  const CorpusIndex& index() const { return index_; }
  const Encoder& encoder() const { return encoder_; }

  RankVector rank_vector(const Sentence& s) const;
  double cosine_similarity(const Sentence& a, const Sentence& b) const;
  double rank_similarity(const Sentence& a, const Sentence& b) const;
  double pair_similarity(const Sentence& a, const Sentence& b,
                         const InferenceConfig& cfg) const;

 private:
  const CorpusIndex& index_;
  const Encoder& encoder_;
};

double pair_similarity(const CorpusIndex& index, const Encoder& encoder,
                       const Sentence& a, const Sentence& b,
                       const InferenceConfig& cfg);

using PairScorer = std::function<double(const Sentence&, const Sentence&)>;

PairScorer cosine_scorer(const Encoder& encoder);
PairScorer rank_scorer(const RankModel& model);
PairScorer blended_scorer(const RankModel& model, InferenceConfig cfg);

// Scores every pair (concurrently when threads are configured).
std::vector<double> predict(std::span<const ScoredPair> dataset,
                            const PairScorer& scorer);

// Spearman between predictions and gold. Throws UsageError for fewer than 2
// pairs and DomainError when either side is constant.
double evaluate(std::span<const ScoredPair> dataset, const PairScorer& scorer);
double evaluate_predictions(std::span<const double> predicted,
                            std::span<const ScoredPair> dataset);

// Bucket b holds values in (edges[b], edges[b+1]]; a value equal to
// edges[0] opens the first bucket. Values outside the edges are unassigned.
std::optional<std::size_t> bucket_of(double value, std::span<const double> edges);

struct BucketResult {
  double lo;
  double hi;
  std::size_t count;
  std::optional<double> spearman;  // empty when undefined for the bucket
};

std::vector<BucketResult> bucket_evaluate(
    std::span<const ScoredPair> dataset, const PairScorer& scorer,
    std::span<const double> edges = std::vector<double>{0.0, 1.0 / 3.0,
                                                        2.0 / 3.0, 1.0});
std::vector<BucketResult> bucket_evaluate_predictions(
    std::span<const double> predicted, std::span<const ScoredPair> dataset,
    std::span<const double> edges);

struct OverlapGroup {
  double lo;
  double hi;
  std::size_t count;
  double mean_overlap;                         // 0 for an empty group
  std::vector<std::optional<double>> spearman;  // one per scorer
};

inline std::vector<double> default_overlap_edges() {
  return {-1.0, 0.2, 0.4, 0.6, 0.8, 1.0};
}

// Groups pairs by cos(E(s1), E(s2)) under the index's encoder and reports
// the mean top-k neighbor overlap and each scorer's Spearman per group.
std::vector<OverlapGroup> overlap_analysis(std::span<const ScoredPair> dataset,
                                           const CorpusIndex& index,
                                           const Encoder& encoder,
                                           std::size_t k,
                                           std::span<const double> group_edges,
                                           std::span<const PairScorer> scorers);

struct UniformityAlignment {
  double uniformity;
  double alignment;
};

// Vectors are L2-normalized first. uniformity = log mean_{i<j}
// exp(-2 |x_i - x_j|^2); alignment = mean over positive pairs of
// |x_a - x_b|^2.
UniformityAlignment uniformity_alignment(
    std::span<const std::vector<double>> vectors,
    std::span<const std::pair<std::size_t, std::size_t>> positive_pairs);

}  // namespace rankvec
