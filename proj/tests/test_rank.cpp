#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "rankvec/corpus.hpp"
#include "rankvec/error.hpp"
#include "rankvec/rank.hpp"
#include "test_util.hpp"

using namespace rankvec;

namespace {

RankVector rv(std::vector<double> ranks) { return normalize(RawRanks{std::move(ranks)}); }

CorpusIndex raw_index(const std::vector<std::vector<double>>& rows) {
  std::vector<Sentence> s;
  std::vector<double> flat;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.push_back(Sentence{i, "s" + std::to_string(i)});
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return CorpusIndex(s, DenseMatrix(rows.size(), rows[0].size(), flat), 1);
}

std::vector<double> with_ties(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(rng() % 5);
  return v;
}

}  // namespace

TEST(ComputeRanks, HandValues) {
  EXPECT_EQ(compute_ranks(std::vector<double>{0.9, 0.1, 0.5}).values,
            (std::vector<double>{1, 3, 2}));
  EXPECT_EQ(compute_ranks(std::vector<double>{0.5, 0.5, 0.1}).values,
            (std::vector<double>{1.5, 1.5, 3}));
  EXPECT_EQ(compute_ranks(std::vector<double>{0.9, 0.1, 0.5}, RankOrder::kAscending).values,
            (std::vector<double>{3, 1, 2}));
}

TEST(ComputeRanks, Errors) {
  EXPECT_THROW(compute_ranks(std::vector<double>{1.0}), UsageError);
  EXPECT_THROW(compute_ranks(std::vector<double>{1.0, std::nan("")}), UsageError);
}

TEST(ComputeRanks, PermutationSum) {
  std::mt19937_64 rng(1);
  auto v = tu::random_vector(rng, 100);
  auto r = compute_ranks(v).values;
  EXPECT_EQ(std::accumulate(r.begin(), r.end(), 0.0), 5050.0);
  auto t = compute_ranks(with_ties(rng, 100)).values;
  EXPECT_EQ(std::accumulate(t.begin(), t.end(), 0.0), 5050.0);
}

TEST(Normalize, HandValues) {
  auto a = rv({1, 2, 3});
  EXPECT_NEAR(a.values[0], -0.7071067811865475, 1e-15);
  EXPECT_NEAR(a.values[1], 0.0, 1e-15);
  EXPECT_NEAR(a.values[2], 0.7071067811865475, 1e-15);
  auto b = rv({1, 2});
  EXPECT_NEAR(b.values[0], -0.7071067811865475, 1e-15);
  EXPECT_NEAR(b.values[1], 0.7071067811865475, 1e-15);
  try {
    rv({2, 2, 2});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "degenerate rank vector");
  }
}

TEST(RankSimilarity, HandValues) {
  EXPECT_NEAR(rank_similarity(rv({1, 2, 3}), rv({1, 2, 3})), 1.0, 1e-15);
  EXPECT_NEAR(rank_similarity(rv({1, 2, 3}), rv({3, 2, 1})), -1.0, 1e-15);
  EXPECT_NEAR(rank_similarity(rv({1, 2, 3}), rv({1, 3, 2})), 0.5, 1e-15);
  EXPECT_THROW(rank_similarity(rv({1, 2, 3}), rv({1, 2})), UsageError);
}

TEST(SpearmanOracle, HandValues) {
  using V = std::vector<double>;
  EXPECT_NEAR(spearman_oracle(V{1, 2, 3}, V{1, 2, 3}), 1.0, 1e-15);
  EXPECT_NEAR(spearman_oracle(V{1, 2, 3}, V{3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(spearman_oracle(V{1, 2, 3, 4}, V{1, 3, 2, 4}), 0.8, 1e-15);
  // Textbook closed form for distinct values.
  EXPECT_NEAR(spearman_oracle(V{10, 20, 30, 40, 50}, V{2, 1, 4, 3, 5}),
              1.0 - 6.0 * 4.0 / (5.0 * 24.0), 1e-15);
  EXPECT_THROW(spearman_oracle(V{1, 1, 1}, V{1, 2, 3}), DomainError);
  EXPECT_THROW(spearman_oracle(V{1, 2}, V{1, 2, 3}), UsageError);
}

TEST(RankVector, EquivalentToSpearmanProperty) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng() % 120;
    auto a = t % 3 ? tu::random_vector(rng, n) : with_ties(rng, n);
    auto b = t % 2 ? tu::random_vector(rng, n) : with_ties(rng, n);
    double oracle;
    try {
      oracle = spearman_oracle(a, b);
    } catch (const DomainError&) {
      continue;
    }
    const double got = rank_similarity(normalize(compute_ranks(a)), normalize(compute_ranks(b)));
    EXPECT_NEAR(got, oracle, 1e-9);
  }
}

TEST(RankVector, InvariantsAndMonotoneTransforms) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 60;
    auto s = t % 2 ? tu::random_vector(rng, n) : with_ties(rng, n);
    if (std::all_of(s.begin(), s.end(), [&](double x) { return x == s[0]; })) continue;
    auto u = normalize(compute_ranks(s));
    double sum = 0, n2 = 0;
    for (double x : u.values.values()) {
      sum += x;
      n2 += x * x;
    }
    EXPECT_LE(std::abs(sum), 1e-9);
    EXPECT_LE(std::abs(std::sqrt(n2) - 1.0), 1e-9);

    auto m = s;
    for (auto& x : m) x = std::exp(3.0 * x) + 7.0;
    EXPECT_EQ(normalize(compute_ranks(m)).values, u.values);

    auto neg = s;
    for (auto& x : neg) x = -x;
    auto asc = normalize(compute_ranks(neg, RankOrder::kAscending));
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(asc.values[i], u.values[i], 1e-12);
  }
}

TEST(RankVector, FromIndex) {
  auto idx = raw_index({{1, 0}, {0, 1}, {1, 1}});
  Embedding e(std::vector<double>{1, 0.1});
  auto u = rank_vector(idx, e);
  double sum = 0, n2 = 0;
  for (double x : u.values.values()) {
    sum += x;
    n2 += x * x;
  }
  EXPECT_NEAR(sum, 0.0, 1e-12);
  EXPECT_NEAR(n2, 1.0, 1e-12);
  EXPECT_NEAR(rank_similarity(u, rank_vector(idx, e)), 1.0, 1e-15);
  // Query equidistant from all rows has no defined rank vector.
  auto flat = raw_index({{1, 0}, {1, 0}});
  EXPECT_THROW(rank_vector(flat, Embedding(std::vector<double>{0, 1})), DomainError);
}

TEST(RankVector, SelfProductRandomIndex) {
  std::mt19937_64 rng(4);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 50; ++i) rows.push_back(tu::random_vector(rng, 8));
  auto idx = raw_index(rows);
  for (int t = 0; t < 10; ++t) {
    auto u = rank_vector(idx, Embedding(tu::random_vector(rng, 8)));
    double d = 0;
    for (double x : u.values.values()) d += x * x;
    EXPECT_NEAR(d, 1.0, 1e-9);
  }
}
