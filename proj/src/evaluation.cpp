#include "rankvec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rankvec/error.hpp"
#include "rankvec/parallel.hpp"
#include "rankvec/textio.hpp"

namespace rankvec {

void InferenceConfig::validate() const {
  if (!(lambda_inf >= 0.0 && lambda_inf <= 1.0))
    throw UsageError("lambda_inf must lie in [0, 1]");
}

std::vector<ScoredPair> load_pairs(const std::filesystem::path& path,
                                   double scale, bool require_gold) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw UsageError("gold scale must be positive");
  std::vector<ScoredPair> out;
  const auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (normalize_text(lines[ln]).empty()) continue;
    const std::string ctx = path.string() + ": line " + std::to_string(ln + 1);
    const auto cols = split(lines[ln], '\t');
    if (cols.size() != 3 && !(cols.size() == 2 && !require_gold))
      throw DataError(ctx + ": expected sentence1<TAB>sentence2<TAB>gold");
    ScoredPair p;
    const std::uint64_t id = 2 * out.size();
    try {
      p.s1 = make_sentence(id, std::string(cols[0]));
      p.s2 = make_sentence(id + 1, std::string(cols[1]));
    } catch (const DataError& e) {
      throw DataError(ctx + ": " + e.what());
    }
    if (cols.size() == 3) {
      p.gold = parse_real(cols[2], ctx);
      p.gold_normalized = p.gold / scale;
      if (p.gold_normalized < 0.0 || p.gold_normalized > 1.0)
        throw DataError(ctx + ": gold " + std::string(cols[2]) +
                        " outside [0, " + format_real(scale) + "]");
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_pairs(const std::vector<ScoredPair>& pairs, std::ostream& out) {
  for (const auto& p : pairs)
    out << p.s1.text << '\t' << p.s2.text << '\t' << format_real(p.gold) << '\n';
}

double blend_similarity(double rank_sim, double cos_sim, double lambda_inf) {
  return lambda_inf * rank_sim + (1.0 - lambda_inf) * cos_sim;
}

RankModel::RankModel(const CorpusIndex& index,
                                   const Encoder& encoder)
    : index_(index), encoder_(encoder) {
  require_same_encoder(index_, encoder_);
}

RankVector RankModel::rank_vector(const Sentence& s) const {
  auto u = rankvec::rank_vector(index_, encoder_.encode(s));
  u.source_id = s.id;
  return u;
}

double RankModel::cosine_similarity(const Sentence& a,
                                           const Sentence& b) const {
  return cosine(encoder_.encode(a), encoder_.encode(b));
}

double RankModel::rank_similarity(const Sentence& a,
                                         const Sentence& b) const {
  return rankvec::rank_similarity(rank_vector(a), rank_vector(b));
}

double RankModel::pair_similarity(const Sentence& a, const Sentence& b,
                                         const InferenceConfig& cfg) const {
  cfg.validate();
  const Embedding ea = encoder_.encode(a);
  const Embedding eb = encoder_.encode(b);
  const double r = rankvec::rank_similarity(rankvec::rank_vector(index_, ea),
                                            rankvec::rank_vector(index_, eb));
  return blend_similarity(r, cosine(ea, eb), cfg.lambda_inf);
}

double pair_similarity(const CorpusIndex& index, const Encoder& encoder,
                       const Sentence& a, const Sentence& b,
                       const InferenceConfig& cfg) {
  return RankModel(index, encoder).pair_similarity(a, b, cfg);
}

PairScorer cosine_scorer(const Encoder& encoder) {
  return [&encoder](const Sentence& a, const Sentence& b) {
    return cosine(encoder.encode(a), encoder.encode(b));
  };
}

PairScorer rank_scorer(const RankModel& model) {
  return [&model](const Sentence& a, const Sentence& b) {
    return model.rank_similarity(a, b);
  };
}

PairScorer blended_scorer(const RankModel& model, InferenceConfig cfg) {
  cfg.validate();
  return [&model, cfg](const Sentence& a, const Sentence& b) {
    return model.pair_similarity(a, b, cfg);
  };
}

std::vector<double> predict(std::span<const ScoredPair> dataset,
                            const PairScorer& scorer) {
  std::vector<double> out(dataset.size());
  parallel_for(dataset.size(), [&](std::size_t i) {
    out[i] = scorer(dataset[i].s1, dataset[i].s2);
  });
  return out;
}

double evaluate_predictions(std::span<const double> predicted,
                            std::span<const ScoredPair> dataset) {
  if (predicted.size() != dataset.size())
    throw UsageError("prediction count does not match dataset size");
  if (dataset.size() < 2) throw UsageError("evaluation needs at least 2 pairs");
  std::vector<double> gold(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) gold[i] = dataset[i].gold;
  return spearman_oracle(predicted, gold);
}

double evaluate(std::span<const ScoredPair> dataset, const PairScorer& scorer) {
  if (dataset.size() < 2) throw UsageError("evaluation needs at least 2 pairs");
  return evaluate_predictions(predict(dataset, scorer), dataset);
}

std::optional<std::size_t> bucket_of(double value, std::span<const double> edges) {
  if (edges.size() < 2) throw UsageError("bucket edges need at least 2 values");
  if (value == edges[0]) return 0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b)
    if (edges[b] < value && value <= edges[b + 1]) return b;
  return std::nullopt;
}

namespace {

void check_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw UsageError("bucket edges need at least 2 values");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i - 1] < edges[i]))
      throw UsageError("bucket edges must be strictly increasing");
}

std::optional<double> spearman_or_undefined(std::span<const double> pred,
                                            std::span<const double> gold) {
  if (pred.size() < 2) return std::nullopt;
  try {
    return spearman_oracle(pred, gold);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<BucketResult> bucket_evaluate_predictions(
    std::span<const double> predicted, std::span<const ScoredPair> dataset,
    std::span<const double> edges) {
  check_edges(edges);
  if (predicted.size() != dataset.size())
    throw UsageError("prediction count does not match dataset size");
  const std::size_t buckets = edges.size() - 1;
  std::vector<std::vector<double>> pred(buckets), gold(buckets);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto b = bucket_of(dataset[i].gold_normalized, edges);
    if (!b) continue;
    pred[*b].push_back(predicted[i]);
    gold[*b].push_back(dataset[i].gold);
  }
  std::vector<BucketResult> out;
  for (std::size_t b = 0; b < buckets; ++b)
    out.push_back({edges[b], edges[b + 1], pred[b].size(),
                   spearman_or_undefined(pred[b], gold[b])});
  return out;
}

std::vector<BucketResult> bucket_evaluate(std::span<const ScoredPair> dataset,
                                          const PairScorer& scorer,
                                          std::span<const double> edges) {
  check_edges(edges);
  return bucket_evaluate_predictions(predict(dataset, scorer), dataset, edges);
}

std::vector<OverlapGroup> overlap_analysis(std::span<const ScoredPair> dataset,
                                           const CorpusIndex& index,
                                           const Encoder& encoder,
                                           std::size_t k,
                                           std::span<const double> group_edges,
                                           std::span<const PairScorer> scorers) {
  check_edges(group_edges);
  require_same_encoder(index, encoder);
  if (k < 1 || k > index.size())
    throw UsageError("k must lie in [1, " + std::to_string(index.size()) + "]");

  std::vector<double> base_cos(dataset.size());
  std::vector<std::size_t> overlap(dataset.size());
  parallel_for(dataset.size(), [&](std::size_t i) {
    const Embedding a = encoder.encode(dataset[i].s1);
    const Embedding b = encoder.encode(dataset[i].s2);
    base_cos[i] = cosine(a, b);
    overlap[i] = neighbor_overlap(index, a, b, k);
  });
  std::vector<std::vector<double>> predictions;
  for (const auto& scorer : scorers) predictions.push_back(predict(dataset, scorer));

  const std::size_t groups = group_edges.size() - 1;
  std::vector<std::vector<std::size_t>> members(groups);
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (auto g = bucket_of(base_cos[i], group_edges)) members[*g].push_back(i);

  std::vector<OverlapGroup> out;
  for (std::size_t g = 0; g < groups; ++g) {
    OverlapGroup group{group_edges[g], group_edges[g + 1], members[g].size(), 0.0, {}};
    double sum = 0.0;
    std::vector<double> gold;
    for (std::size_t i : members[g]) {
      sum += static_cast<double>(overlap[i]);
      gold.push_back(dataset[i].gold);
    }
    if (!members[g].empty()) group.mean_overlap = sum / static_cast<double>(members[g].size());
    for (const auto& pred_all : predictions) {
      std::vector<double> pred;
      for (std::size_t i : members[g]) pred.push_back(pred_all[i]);
      group.spearman.push_back(spearman_or_undefined(pred, gold));
    }
    out.push_back(std::move(group));
  }
  return out;
}

UniformityAlignment uniformity_alignment(
    std::span<const std::vector<double>> vectors,
    std::span<const std::pair<std::size_t, std::size_t>> positive_pairs) {
  if (vectors.size() < 2) throw UsageError("uniformity needs at least 2 vectors");
  if (positive_pairs.empty())
    throw UsageError("alignment needs at least 1 positive pair");
  const std::size_t dim = vectors.front().size();
  std::vector<std::vector<double>> unit;
  unit.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (v.size() != dim) throw UsageError("vector dimensions differ");
    const double n = norm(v);
    if (n == 0.0) throw DomainError("cannot normalize a zero vector");
    std::vector<double> u(v);
    for (double& x : u) x /= n;
    unit.push_back(std::move(u));
  }
  auto sq_dist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = unit[a][k] - unit[b][k];
      s += d * d;
    }
    return s;
  };

  // log-mean-exp over distinct pairs; the max exponent is subtracted first.
  std::vector<double> exponents;
  exponents.reserve(unit.size() * (unit.size() - 1) / 2);
  for (std::size_t i = 0; i < unit.size(); ++i)
    for (std::size_t j = i + 1; j < unit.size(); ++j)
      exponents.push_back(-2.0 * sq_dist(i, j));
  const double mx = *std::max_element(exponents.begin(), exponents.end());
  double sum = 0.0;
  for (double e : exponents) sum += std::exp(e - mx);
  const double uniformity =
      mx + std::log(sum / static_cast<double>(exponents.size()));

  double align = 0.0;
  for (const auto& [a, b] : positive_pairs) {
    if (a >= unit.size() || b >= unit.size())
      throw UsageError("positive pair index out of range");
    align += sq_dist(a, b);
  }
  return {uniformity, align / static_cast<double>(positive_pairs.size())};
}

}  // namespace rankvec
