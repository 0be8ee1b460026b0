#pragma once

// Training objective for the retrained encoder:
//
//   l_cl    = sum_i -log softmax_j(cos(v_i, v_j+) / tau)[i]     (in-batch negatives)
//   l_r     = mean over masked (i, j) of (u_i.u_j - cos(E2 x_i, E2 x_j))^2
//   l_total = max(lambda_train * l_r, l_cl)
//
// where u_i are rank vectors from the frozen base encoder and the mask keeps
// pairs with tau_l <= u_i.u_j <= tau_u. Gradients are analytic for the linear
// hashed-trigram encoder; at an exact hinge tie the contrastive branch is
// differentiated.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rankvec/corpus.hpp"
#include "rankvec/encoder.hpp"
#include "rankvec/numerics.hpp"
#include "rankvec/rank.hpp"

namespace rankvec {

struct TrainConfig {
  std::size_t batch_size = 64;
  double temperature = 0.05;
  double lambda_train = 0.05;
  double tau_l = 0.5;
  double tau_u = 0.8;
  double dropout_rate = kDefaultDropout;
  double learning_rate = 0.1;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  std::size_t dim = kDefaultDim;
  std::size_t features = kDefaultFeatures;

  // Throws UsageError describing the first violated constraint.
  void validate() const;
};

struct BatchRankTargets {
  DenseMatrix sims;               // m x m rank-vector inner products
  std::vector<std::uint8_t> mask;  // row-major; 1 where tau_l <= sim <= tau_u

  std::size_t size() const { return sims.rows(); }
  bool masked(std::size_t i, std::size_t j) const {
    return mask[i * size() + j] != 0;
  }
  std::size_t mask_count() const;
};

double contrastive_loss(std::span<const Embedding> anchors,
                        std::span<const Embedding> positives,
                        double temperature);

BatchRankTargets rank_targets_from_vectors(std::span<const RankVector> u,
                                           double tau_l, double tau_u);

// u_i = rank_vector(index, base.encode(batch[i])). Rank vectors are computed
// concurrently when worker threads are configured.
BatchRankTargets batch_rank_targets(const CorpusIndex& index,
                                    std::span<const Sentence> batch,
                                    const Encoder& base, double tau_l,
                                    double tau_u);

// Mean squared error over masked pairs; 0 when the mask is empty.
double rank_loss(const BatchRankTargets& targets,
                 std::span<const Embedding> embeddings);

double total_loss(double l_cl, double l_r, double lambda_train);

// Precomputed inputs to one optimization step.
struct TrainingBatch {
  std::vector<FeatureVector> anchors;
  std::vector<FeatureVector> positives;  // dropout-augmented anchors
};

enum class LossBranch { kContrastive, kRank };

struct LossEvaluation {
  double l_cl = 0.0;
  double l_r = 0.0;
  double weighted_rank = 0.0;  // lambda_train * l_r
  double total = 0.0;
  LossBranch branch = LossBranch::kContrastive;
  DenseMatrix gradient;  // d l_total / d projection, D x F
};

LossEvaluation loss_and_gradient(const EncoderParams& params,
                                 const TrainingBatch& batch,
                                 const BatchRankTargets& targets,
                                 const TrainConfig& config);

DenseMatrix gradient(const EncoderParams& params, const TrainingBatch& batch,
                     const BatchRankTargets& targets, const TrainConfig& config);

struct LossRecord {
  std::size_t step;
  double l_cl;
  double lambda_lr;
  double l_total;
};

struct TrainResult {
  EncoderParams params;
  std::vector<LossRecord> trace;
};

// Trains a fresh encoder initialized from config.seed. `base` must be the
// encoder that built `index` (fingerprints are checked). Each epoch visits
// the sentences in a seeded shuffle; a trailing batch with fewer than 2
// sentences is skipped. Deterministic for a given config.
TrainResult train(const std::vector<Sentence>& sentences,
                  const CorpusIndex& index, const Encoder& base,
                  const TrainConfig& config);
TrainResult train(const std::filesystem::path& corpus_file,
                  const CorpusIndex& index, const Encoder& base,
                  const TrainConfig& config);

// CSV with header "step,l_cl,lambda_lr,l_total", shortest round-trip reals.
void write_loss_log(const std::vector<LossRecord>& trace, std::ostream& out);
void write_loss_log(const std::vector<LossRecord>& trace,
                    const std::filesystem::path& path);

}  // namespace rankvec
