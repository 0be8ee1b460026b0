#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "rankvec/error.hpp"
#include "rankvec/toy.hpp"
#include "test_util.hpp"

using namespace rankvec;

TEST(Toy, ShapeAndDeterminism) {
  ToyConfig c;
  c.seed = 5;
  auto a = generate_toy(c);
  EXPECT_EQ(a.corpus.size(), c.clusters * c.per_cluster);
  EXPECT_EQ(a.pairs.size(), c.pairs);
  auto b = generate_toy(c);
  EXPECT_EQ(a.corpus, b.corpus);
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    EXPECT_EQ(a.pairs[i].s1, b.pairs[i].s1);
    EXPECT_EQ(a.pairs[i].gold, b.pairs[i].gold);
  }
  c.seed = 6;
  EXPECT_NE(generate_toy(c).corpus, a.corpus);
}

TEST(Toy, FilesAreIdenticalForSameSeed) {
  tu::TempDir dir;
  auto d = generate_toy(ToyConfig{.seed = 1});
  write_toy(d, dir / "c1.txt", dir / "p1.tsv");
  write_toy(generate_toy(ToyConfig{.seed = 1}), dir / "c2.txt", dir / "p2.tsv");
  EXPECT_EQ(tu::read_file(dir / "c1.txt"), tu::read_file(dir / "c2.txt"));
  EXPECT_EQ(tu::read_file(dir / "p1.tsv"), tu::read_file(dir / "p2.tsv"));
}

TEST(Toy, GoldOrderedByClusterDistance) {
  auto d = generate_toy(ToyConfig{.seed = 3});
  double min_same = 5, max_far = 0, min_near = 5, max_near = 0;
  std::set<std::size_t> distances;
  for (std::size_t i = 0; i < d.pairs.size(); ++i) {
    const auto [ca, cb] = d.pair_clusters[i];
    const auto dist = ring_distance(ca, cb, 6);
    distances.insert(dist);
    const double g = d.pairs[i].gold;
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 5.0);
    EXPECT_DOUBLE_EQ(d.pairs[i].gold_normalized, g / 5.0);
    if (dist == 0) min_same = std::min(min_same, g);
    if (dist == 1) {
      min_near = std::min(min_near, g);
      max_near = std::max(max_near, g);
    }
    if (dist >= 2) max_far = std::max(max_far, g);
  }
  EXPECT_EQ(distances, (std::set<std::size_t>{0, 1, 2, 3}));
  EXPECT_GT(min_same, max_near);
  EXPECT_GT(min_near, max_far);
}

TEST(Toy, SentencesAreValidCorpusLines) {
  auto d = generate_toy(ToyConfig{.seed = 4, .per_cluster = 20, .pairs = 10});
  for (const auto& s : d.corpus) {
    EXPECT_FALSE(s.empty());
    EXPECT_EQ(s.find('\t'), std::string::npos);
    EXPECT_EQ(normalize_text(s), s);
  }
}

TEST(Toy, Validation) {
  EXPECT_THROW(generate_toy(ToyConfig{.clusters = 1}), UsageError);
  EXPECT_THROW(generate_toy(ToyConfig{.per_cluster = 1}), UsageError);
  ToyConfig c;
  c.neighbor_rate = 1.5;
  EXPECT_THROW(generate_toy(c), UsageError);
}

TEST(Toy, RingDistance) {
  EXPECT_EQ(ring_distance(0, 5, 6), 1u);
  EXPECT_EQ(ring_distance(1, 4, 6), 3u);
  EXPECT_EQ(ring_distance(2, 2, 6), 0u);
}
