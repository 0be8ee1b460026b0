#include "rankvec/rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rankvec/corpus.hpp"
#include "rankvec/error.hpp"

namespace rankvec {

RawRanks compute_ranks(std::span<const double> scores, RankOrder order) {
  const std::size_t n = scores.size();
  if (n < 2) throw UsageError("ranking needs at least 2 scores");
  if (!all_finite(scores)) throw UsageError("ranking a non-finite score");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (order == RankOrder::kDescending)
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] > scores[b];
    });
  else
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] < scores[b];
    });

  RawRanks out{std::vector<double>(n)};
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    // positions i+1 .. j share their mean
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) out.values[idx[k]] = rank;
    i = j;
  }
  return out;
}

RankVector normalize(const RawRanks& r) {
  const std::size_t n = r.values.size();
  if (n < 2) throw UsageError("rank vector needs at least 2 entries");
  const auto [mean, sigma] = mean_std(r.values);
  if (sigma == 0.0) throw DomainError("degenerate rank vector");
  const double denom = std::sqrt(static_cast<double>(n)) * sigma;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = (r.values[i] - mean) / denom;
  return RankVector{DenseVector(std::move(g)), std::nullopt};
}

RankVector rank_vector(const CorpusIndex& index, const Embedding& e) {
  return normalize(compute_ranks(index.cosine_scores(e)));
}

double rank_similarity(const RankVector& u, const RankVector& v) {
  if (u.size() != v.size())
    throw UsageError("rank vector dimension mismatch: " +
                     std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()));
  return std::clamp(dot(u.values.values(), v.values.values()), -1.0, 1.0);
}

namespace {

std::vector<double> counting_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t greater = 0;
    std::size_t equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (x[j] > x[i]) ++greater;
      else if (x[j] == x[i]) ++equal;
    }
    r[i] = static_cast<double>(greater) + 0.5 * static_cast<double>(equal + 1);
  }
  return r;
}

}  // namespace

double spearman_oracle(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw UsageError("spearman: length mismatch " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  if (a.size() < 2) throw UsageError("spearman: need at least 2 values");
  if (!all_finite(a) || !all_finite(b))
    throw UsageError("spearman: non-finite value");
  const auto ra = counting_ranks(a);
  const auto rb = counting_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - ma;
    const double db = rb[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0)
    throw DomainError("spearman: constant input, correlation undefined");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace rankvec
