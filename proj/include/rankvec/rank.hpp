#pragma once

// Rank vectors: a sentence is represented by the (normalized) ranks of every
// corpus sentence ordered by similarity to it. After normalization the inner
// product of two rank vectors is exactly Spearman's rank correlation of the
// underlying score lists.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rankvec/numerics.hpp"

namespace rankvec {

class CorpusIndex;
class Embedding;

// Rank 1 = highest score. Tied scores share the mean of the positions they
// span, so the total is always n(n+1)/2.
struct RawRanks {
  std::vector<double> values;
};

// Centered, unit-norm rank vector.
struct RankVector {
  DenseVector values;
  std::optional<std::uint64_t> source_id;

  std::size_t size() const { return values.size(); }
};

enum class RankOrder { kDescending, kAscending };

// Throws UsageError for n < 2 or non-finite scores.
RawRanks compute_ranks(std::span<const double> scores,
                       RankOrder order = RankOrder::kDescending);

// g(r) = (r - mean(r)) / (sqrt(n) * sigma(r)), population sigma. Throws
// DomainError("degenerate rank vector") when every rank is tied.
RankVector normalize(const RawRanks& r);

// Cosine of e against every corpus row, ranked and normalized.
RankVector rank_vector(const CorpusIndex& index, const Embedding& e);

// Inner product clamped to [-1, 1].
double rank_similarity(const RankVector& u, const RankVector& v);

// Spearman's rho computed independently of the rank-vector path: average
// ranks by pairwise counting followed by a Pearson correlation. Quadratic in
// n. Throws DomainError if either ranked sequence has zero variance.
double spearman_oracle(std::span<const double> a, std::span<const double> b);

}  // namespace rankvec
