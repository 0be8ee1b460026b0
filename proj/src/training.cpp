#include "rankvec/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

#include "rankvec/error.hpp"
#include "rankvec/parallel.hpp"
#include "rankvec/textio.hpp"

namespace rankvec {

void TrainConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (batch_size < 2) throw UsageError("batch_size must be at least 2");
  if (!finite(temperature) || temperature <= 0.0)
    throw UsageError("tau (temperature) must be positive");
  if (!finite(lambda_train) || lambda_train <= 0.0)
    throw UsageError("lambda_train must be positive");
  if (!finite(tau_l) || !finite(tau_u))
    throw UsageError("tau_l and tau_u must be finite");
  if (tau_l > tau_u) throw UsageError("tau_l must not exceed tau_u");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw UsageError("dropout must lie in [0, 1)");
  if (!finite(learning_rate) || learning_rate <= 0.0)
    throw UsageError("learning rate must be positive");
  if (dim == 0 || features == 0)
    throw UsageError("encoder dimensions must be positive");
}

std::size_t BatchRankTargets::mask_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

double contrastive_loss(std::span<const Embedding> anchors,
                        std::span<const Embedding> positives,
                        double temperature) {
  const std::size_t m = anchors.size();
  if (m == 0 || positives.size() != m)
    throw UsageError("contrastive loss needs equal, non-zero batch sizes");
  std::vector<double> logits(m);
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      logits[j] = cosine(anchors[i], positives[j]) / temperature;
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - mx);
    loss += std::log(sum) - (logits[i] - mx);
  }
  return loss;
}

BatchRankTargets rank_targets_from_vectors(std::span<const RankVector> u,
                                           double tau_l, double tau_u) {
  const std::size_t m = u.size();
  if (m < 1) throw UsageError("rank targets need a non-empty batch");
  const std::size_t n = u.front().size();
  DenseMatrix stacked(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    if (u[i].size() != n) throw UsageError("rank vector dimension mismatch");
    std::copy(u[i].values.values().begin(), u[i].values.values().end(),
              stacked.mutable_row(i).begin());
  }
  DenseMatrix sims = matmul(stacked, transpose(stacked));
  std::vector<std::uint8_t> mask(m * m);
  for (std::size_t k = 0; k < m * m; ++k) {
    double& s = sims.mutable_values()[k];
    s = std::clamp(s, -1.0, 1.0);
    mask[k] = (tau_l <= s && s <= tau_u) ? 1 : 0;
  }
  return BatchRankTargets{std::move(sims), std::move(mask)};
}

BatchRankTargets batch_rank_targets(const CorpusIndex& index,
                                    std::span<const Sentence> batch,
                                    const Encoder& base, double tau_l,
                                    double tau_u) {
  if (batch.size() < 2) throw UsageError("rank targets need a batch of at least 2");
  if (tau_l > tau_u) throw UsageError("tau_l must not exceed tau_u");
  std::vector<std::optional<RankVector>> slots(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    try {
      slots[i] = rank_vector(index, base.encode(batch[i]));
      slots[i]->source_id = batch[i].id;
    } catch (const DomainError& e) {
      throw DomainError("sentence " + std::to_string(batch[i].id) + " (\"" +
                        batch[i].text + "\"): " + e.what());
    }
  });
  std::vector<RankVector> u;
  u.reserve(slots.size());
  for (auto& s : slots) u.push_back(std::move(*s));
  return rank_targets_from_vectors(u, tau_l, tau_u);
}

double rank_loss(const BatchRankTargets& targets,
                 std::span<const Embedding> embeddings) {
  const std::size_t m = targets.size();
  if (embeddings.size() != m)
    throw UsageError("rank loss: " + std::to_string(embeddings.size()) +
                     " embeddings for " + std::to_string(m) + " targets");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (!targets.masked(i, j)) continue;
      const double d = targets.sims(i, j) - cosine(embeddings[i], embeddings[j]);
      sum += d * d;
      ++count;
    }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double total_loss(double l_cl, double l_r, double lambda_train) {
  return std::max(lambda_train * l_r, l_cl);
}

namespace {

struct Encoded {
  std::vector<std::vector<double>> vecs;
  std::vector<double> norms;
};

Encoded encode_all(const EncoderParams& params,
                   const std::vector<FeatureVector>& features) {
  Encoded out;
  for (const auto& f : features) {
    auto e = encode_features(params, f);
    out.vecs.emplace_back(e.values().begin(), e.values().end());
    out.norms.push_back(norm(out.vecs.back()));
    if (out.norms.back() == 0.0)
      throw DomainError("zero-norm embedding in training batch");
  }
  return out;
}

// grad_x += weight * d cos(x, y) / dx, with c = cos(x, y).
void add_cosine_grad(std::vector<double>& grad_x, const std::vector<double>& x,
                     double nx, const std::vector<double>& y, double ny,
                     double c, double weight) {
  const double a = weight / (nx * ny);
  const double b = weight * c / (nx * nx);
  for (std::size_t k = 0; k < x.size(); ++k) grad_x[k] += a * y[k] - b * x[k];
}

// grad += d (D) outer f (F), skipping zero features.
void add_outer(DenseMatrix& grad, const std::vector<double>& d,
               const FeatureVector& f) {
  for (std::size_t c = 0; c < f.size(); ++c) {
    if (f[c] == 0.0) continue;
    for (std::size_t r = 0; r < d.size(); ++r) grad(r, c) += d[r] * f[c];
  }
}

}  // namespace

LossEvaluation loss_and_gradient(const EncoderParams& params,
                                 const TrainingBatch& batch,
                                 const BatchRankTargets& targets,
                                 const TrainConfig& config) {
  const std::size_t m = batch.anchors.size();
  if (m == 0 || batch.positives.size() != m || targets.size() != m)
    throw UsageError("training batch sizes disagree");
  const double tau = config.temperature;
  const Encoded v = encode_all(params, batch.anchors);
  const Encoded w = encode_all(params, batch.positives);
  const std::size_t dim = params.dim();

  // Contrastive forward, keeping the softmax for the backward pass.
  DenseMatrix cos_vw(m, m);
  DenseMatrix prob(m, m);
  double l_cl = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      cos_vw(i, j) = cosine_with_norms(v.vecs[i], v.norms[i], w.vecs[j], w.norms[j]);
    double mx = cos_vw(i, 0) / tau;
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, cos_vw(i, j) / tau);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      prob(i, j) = std::exp(cos_vw(i, j) / tau - mx);
      sum += prob(i, j);
    }
    for (std::size_t j = 0; j < m; ++j) prob(i, j) /= sum;
    l_cl += std::log(sum) - (cos_vw(i, i) / tau - mx);
  }

  // Rank forward.
  DenseMatrix cos_vv(m, m);
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      cos_vv(i, j) = cosine_with_norms(v.vecs[i], v.norms[i], v.vecs[j], v.norms[j]);
      if (!targets.masked(i, j)) continue;
      const double d = targets.sims(i, j) - cos_vv(i, j);
      sq += d * d;
      ++count;
    }
  const double l_r = count == 0 ? 0.0 : sq / static_cast<double>(count);

  LossEvaluation out{l_cl, l_r, config.lambda_train * l_r,
                     total_loss(l_cl, l_r, config.lambda_train),
                     LossBranch::kContrastive,
                     DenseMatrix(dim, params.features())};
  out.branch = (out.weighted_rank > l_cl) ? LossBranch::kRank
                                          : LossBranch::kContrastive;

  std::vector<std::vector<double>> grad_v(m, std::vector<double>(dim, 0.0));
  if (out.branch == LossBranch::kContrastive) {
    std::vector<std::vector<double>> grad_w(m, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double g = (prob(i, j) - (i == j ? 1.0 : 0.0)) / tau;
        if (g == 0.0) continue;
        add_cosine_grad(grad_v[i], v.vecs[i], v.norms[i], w.vecs[j], w.norms[j],
                        cos_vw(i, j), g);
        add_cosine_grad(grad_w[j], w.vecs[j], w.norms[j], v.vecs[i], v.norms[i],
                        cos_vw(i, j), g);
      }
    for (std::size_t j = 0; j < m; ++j)
      add_outer(out.gradient, grad_w[j], batch.positives[j]);
  } else {
    const double scale = config.lambda_train * -2.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        // cos(v, v) is constant, so diagonal pairs carry no gradient.
        if (i == j || !targets.masked(i, j)) continue;
        const double g = scale * (targets.sims(i, j) - cos_vv(i, j));
        add_cosine_grad(grad_v[i], v.vecs[i], v.norms[i], v.vecs[j], v.norms[j],
                        cos_vv(i, j), g);
        add_cosine_grad(grad_v[j], v.vecs[j], v.norms[j], v.vecs[i], v.norms[i],
                        cos_vv(i, j), g);
      }
  }
  for (std::size_t i = 0; i < m; ++i)
    add_outer(out.gradient, grad_v[i], batch.anchors[i]);
  return out;
}

DenseMatrix gradient(const EncoderParams& params, const TrainingBatch& batch,
                     const BatchRankTargets& targets, const TrainConfig& config) {
  return loss_and_gradient(params, batch, targets, config).gradient;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

TrainResult train(const std::vector<Sentence>& sentences,
                  const CorpusIndex& index, const Encoder& base,
                  const TrainConfig& config) {
  config.validate();
  require_same_encoder(index, base);
  if (sentences.size() < 2)
    throw DataError("training needs at least 2 sentences");

  TrainResult result{
      EncoderParams::initialize(config.dim, config.features, config.seed), {}};
  if (config.epochs == 0) return result;

  std::vector<FeatureVector> features(sentences.size());
  parallel_for(sentences.size(), [&](std::size_t i) {
    features[i] = featurize(sentences[i], config.features);
  });

  std::mt19937_64 shuffle_rng(mix(config.seed));
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto& projection = result.params.projection;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng() % (i + 1)]);

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      if (end - start < 2) continue;
      std::vector<Sentence> batch_sentences;
      TrainingBatch batch;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t s = order[k];
        batch_sentences.push_back(sentences[s]);
        batch.anchors.push_back(features[s]);
        batch.positives.push_back(dropout_features(
            features[s], config.dropout_rate,
            mix(config.seed ^ mix(step * 1000003ULL + (k - start)))));
      }
      const auto targets = batch_rank_targets(index, batch_sentences, base,
                                              config.tau_l, config.tau_u);
      const auto eval = loss_and_gradient(result.params, batch, targets, config);
      result.trace.push_back({step, eval.l_cl, eval.weighted_rank, eval.total});

      auto p = projection.mutable_values();
      const auto g = eval.gradient.values();
      for (std::size_t k = 0; k < p.size(); ++k)
        p[k] -= config.learning_rate * g[k];
      if (!all_finite(p))
        throw DomainError("training diverged at step " + std::to_string(step));
      ++step;
    }
  }
  return result;
}

TrainResult train(const std::filesystem::path& corpus_file,
                  const CorpusIndex& index, const Encoder& base,
                  const TrainConfig& config) {
  config.validate();
  std::vector<Sentence> sentences;
  for (auto& line : read_corpus(corpus_file)) sentences.push_back(line.sentence);
  return train(sentences, index, base, config);
}

void write_loss_log(const std::vector<LossRecord>& trace, std::ostream& out) {
  out << "step,l_cl,lambda_lr,l_total\n";
  for (const auto& r : trace)
    out << r.step << ',' << format_real(r.l_cl) << ',' << format_real(r.lambda_lr)
        << ',' << format_real(r.l_total) << '\n';
}

void write_loss_log(const std::vector<LossRecord>& trace,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  write_loss_log(trace, out);
}

}  // namespace rankvec
