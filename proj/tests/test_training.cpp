#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rankvec/corpus.hpp"
#include "rankvec/error.hpp"
#include "rankvec/toy.hpp"
#include "rankvec/training.hpp"
#include "test_util.hpp"

using namespace rankvec;

namespace {

Embedding emb(std::vector<double> v) { return Embedding(std::move(v)); }

RankVector unit_rank(std::mt19937_64& rng, std::size_t n) {
  auto v = tu::random_vector(rng, n);
  double mu = 0;
  for (double x : v) mu += x;
  mu /= n;
  double s = 0;
  for (auto& x : v) {
    x -= mu;
    s += x * x;
  }
  for (auto& x : v) x /= std::sqrt(s);
  return RankVector{DenseVector(v), std::nullopt};
}

TrainingBatch random_batch(std::mt19937_64& rng, std::size_t m, std::size_t F) {
  TrainingBatch b;
  for (std::size_t i = 0; i < m; ++i) {
    auto a = tu::random_vector(rng, F);
    auto p = a;
    for (auto& x : p) x += 0.3 * tu::random_vector(rng, 1)[0];
    b.anchors.push_back(a);
    b.positives.push_back(p);
  }
  return b;
}

double numeric_grad(const EncoderParams& p, const TrainingBatch& b,
                    const BatchRankTargets& t, const TrainConfig& c, std::size_t r,
                    std::size_t col, double h = 1e-5) {
  auto plus = p, minus = p;
  plus.projection(r, col) += h;
  minus.projection(r, col) -= h;
  return (loss_and_gradient(plus, b, t, c).total - loss_and_gradient(minus, b, t, c).total) /
         (2 * h);
}

struct ToyFixture {
  ToyDataset data;
  HashNgramEncoder base;
  CorpusIndex index;
  std::vector<Sentence> sentences;

  explicit ToyFixture(std::size_t per_cluster = 40)
      : data(generate_toy(ToyConfig{.seed = 0, .per_cluster = per_cluster, .pairs = 30})),
        base(EncoderParams::initialize(16, 256, 0)),
        index(build_index(data.corpus, base)),
        sentences(index.sentences()) {}
};

}  // namespace

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  auto bad = [](auto mutate, const char* msg) {
    TrainConfig c;
    mutate(c);
    try {
      c.validate();
      ADD_FAILURE() << "no error for " << msg;
    } catch (const UsageError& e) {
      EXPECT_NE(std::string(e.what()).find(msg), std::string::npos) << e.what();
    }
  };
  bad([](TrainConfig& c) { c.batch_size = 1; }, "batch_size");
  bad([](TrainConfig& c) { c.temperature = 0; }, "tau");
  bad([](TrainConfig& c) { c.lambda_train = 0; }, "lambda_train");
  bad([](TrainConfig& c) { c.tau_l = 0.9; c.tau_u = 0.5; }, "tau_l must not exceed tau_u");
  bad([](TrainConfig& c) { c.dropout_rate = 1.0; }, "dropout");
  bad([](TrainConfig& c) { c.learning_rate = -1; }, "learning rate");
  TrainConfig wide;
  wide.tau_l = -1;
  wide.tau_u = 1;
  EXPECT_NO_THROW(wide.validate());
}

TEST(ContrastiveLoss, HandValues) {
  std::vector<Embedding> one{emb({1, 2})};
  EXPECT_EQ(contrastive_loss(one, one, 0.05), 0.0);
  std::vector<Embedding> v{emb({1, 0}), emb({0, 1})};
  EXPECT_NEAR(contrastive_loss(v, v, 1.0), 2.0 * std::log(1.0 + std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(contrastive_loss(v, v, 1.0), 0.626523, 1e-6);
  std::vector<Embedding> z{emb({0, 0}), emb({0, 1})};
  EXPECT_THROW(contrastive_loss(z, v, 1.0), DomainError);
}

TEST(ContrastiveLoss, NonNegativeAndStableAtTinyTemperature) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<Embedding> a, p;
    for (int i = 0; i < 8; ++i) {
      a.push_back(emb(tu::random_vector(rng, 5)));
      p.push_back(emb(tu::random_vector(rng, 5)));
    }
    const double l = contrastive_loss(a, p, t % 2 ? 1e-4 : 0.05);
    EXPECT_TRUE(std::isfinite(l));
    EXPECT_GE(l, 0.0);
  }
}

TEST(RankTargets, ThresholdMask) {
  std::mt19937_64 rng(2);
  std::vector<RankVector> u;
  for (int i = 0; i < 4; ++i) u.push_back(unit_rank(rng, 30));
  auto t = rank_targets_from_vectors(u, 0.5, 0.8);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const double s = t.sims(i, j);
      EXPECT_EQ(t.masked(i, j), s >= 0.5 && s <= 0.8);
    }
  auto all = rank_targets_from_vectors(u, -1, 1);
  EXPECT_EQ(all.mask_count(), 16u);
}

TEST(RankTargets, OnlyMiddleSimilarityPasses) {
  // Rank vectors built so that u0.u1 = 0.9, u0.u2 = 0.6, u0.u3 = 0.3.
  auto make = [](double c) {
    const double s = std::sqrt(1 - c * c);
    // Orthonormal centered basis in R^4: e1 = (1,-1,0,0)/sqrt2, e2 = (0,0,1,-1)/sqrt2.
    const double r = 1 / std::sqrt(2.0);
    return RankVector{DenseVector({c * r, -c * r, s * r, -s * r}), std::nullopt};
  };
  std::vector<RankVector> u{make(1.0), make(0.9), make(0.6), make(0.3)};
  auto t = rank_targets_from_vectors(u, 0.5, 0.8);
  EXPECT_FALSE(t.masked(0, 1));
  EXPECT_TRUE(t.masked(0, 2));
  EXPECT_FALSE(t.masked(0, 3));
}

TEST(RankTargets, IdenticalSentencesGiveEmptyMask) {
  ToyFixture fx;
  std::vector<Sentence> batch(4, fx.sentences[3]);
  auto t = batch_rank_targets(fx.index, batch, fx.base, 0.5, 0.8);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(t.sims(i, j), 1.0, 1e-12);
      if (i != j) EXPECT_FALSE(t.masked(i, j));
    }
  std::vector<Embedding> e(4, fx.base.encode(fx.sentences[3]));
  auto wide = batch_rank_targets(fx.index, std::vector<Sentence>(4, fx.sentences[3]),
                                 fx.base, 2.0, 3.0);
  EXPECT_EQ(wide.mask_count(), 0u);
  EXPECT_EQ(rank_loss(wide, e), 0.0);
}

TEST(RankLoss, HandValues) {
  BatchRankTargets t{DenseMatrix(2, 2, {1, 0.6, 0.6, 1}), {0, 1, 0, 0}};
  // cos of these two embeddings is 0.1.
  std::vector<Embedding> e{emb({1, 0}), emb({0.1, std::sqrt(1 - 0.01)})};
  EXPECT_NEAR(rank_loss(t, e), 0.25, 1e-15);
  BatchRankTargets perfect{DenseMatrix(2, 2, {1, 0.1, 0.1, 1}), {1, 1, 1, 1}};
  EXPECT_NEAR(rank_loss(perfect, e), 0.0, 1e-15);
}

TEST(RankLoss, ReorderInvariant) {
  std::mt19937_64 rng(3);
  std::vector<RankVector> u;
  std::vector<Embedding> e;
  for (int i = 0; i < 6; ++i) {
    u.push_back(unit_rank(rng, 20));
    e.push_back(emb(tu::random_vector(rng, 4)));
  }
  const double l = rank_loss(rank_targets_from_vectors(u, -1, 1), e);
  std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  std::vector<RankVector> u2;
  std::vector<Embedding> e2;
  for (auto p : perm) {
    u2.push_back(u[p]);
    e2.push_back(e[p]);
  }
  EXPECT_NEAR(rank_loss(rank_targets_from_vectors(u2, -1, 1), e2), l, 1e-12);
}

TEST(TotalLoss, Branches) {
  EXPECT_DOUBLE_EQ(total_loss(0.2, 1.0, 0.05), 0.2);
  EXPECT_DOUBLE_EQ(total_loss(0.2, 10.0, 0.05), 0.5);
  EXPECT_EQ(total_loss(0.7, 0.0, 0.05), 0.7);
}

TEST(Gradient, ZeroForSymmetricUniformBatch) {
  // Identical anchors and positives: every logit equals 1/tau, softmax is
  // uniform and the cross-entropy gradient cancels.
  auto p = EncoderParams::initialize(4, 8, 1);
  std::vector<double> f(8, 0.0);
  f[2] = 1.0;
  TrainingBatch b{{f, f, f}, {f, f, f}};
  BatchRankTargets t{DenseMatrix(3, 3), std::vector<std::uint8_t>(9, 0)};
  TrainConfig c;
  auto ev = loss_and_gradient(p, b, t, c);
  EXPECT_EQ(ev.branch, LossBranch::kContrastive);
  for (double g : ev.gradient.values()) EXPECT_NEAR(g, 0.0, 1e-10);
}

TEST(Gradient, MatchesFiniteDifferencesOnBothBranches) {
  std::mt19937_64 rng(4);
  for (int branch = 0; branch < 2; ++branch) {
    for (int inst = 0; inst < 5; ++inst) {
      auto p = EncoderParams::initialize(4, 8, 100 + inst);
      auto b = random_batch(rng, 3, 8);
      std::vector<RankVector> u;
      for (int i = 0; i < 3; ++i) u.push_back(unit_rank(rng, 12));
      auto t = rank_targets_from_vectors(u, -1, 1);
      TrainConfig c;
      c.tau_l = -1;
      c.tau_u = 1;
      c.temperature = 0.5;
      c.lambda_train = branch ? 1e4 : 1e-6;
      auto ev = loss_and_gradient(p, b, t, c);
      ASSERT_EQ(ev.branch, branch ? LossBranch::kRank : LossBranch::kContrastive);
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t col = 0; col < 8; ++col) {
          const double num = numeric_grad(p, b, t, c, r, col);
          const double an = ev.gradient(r, col);
          const double scale = std::max({std::abs(num), std::abs(an), 1e-8});
          EXPECT_LE(std::abs(num - an) / scale, 1e-4) << branch << " " << r << " " << col;
        }
      EXPECT_EQ(gradient(p, b, t, c), ev.gradient);
    }
  }
}

TEST(Gradient, TieTakesContrastiveBranch) {
  std::mt19937_64 rng(5);
  auto p = EncoderParams::initialize(4, 8, 7);
  auto b = random_batch(rng, 3, 8);
  std::vector<RankVector> u;
  for (int i = 0; i < 3; ++i) u.push_back(unit_rank(rng, 12));
  auto t = rank_targets_from_vectors(u, -1, 1);
  TrainConfig c;
  c.tau_l = -1;
  c.tau_u = 1;
  auto probe = loss_and_gradient(p, b, t, c);
  ASSERT_GT(probe.l_r, 0.0);
  // Nudge lambda until lambda * l_r == l_cl holds exactly in floating point.
  double lam = probe.l_cl / probe.l_r;
  for (int i = 0; i < 64 && lam * probe.l_r != probe.l_cl; ++i)
    lam = std::nextafter(lam, lam * probe.l_r < probe.l_cl ? 1e300 : 0.0);
  ASSERT_EQ(lam * probe.l_r, probe.l_cl);
  c.lambda_train = lam;
  auto ev = loss_and_gradient(p, b, t, c);
  EXPECT_EQ(ev.branch, LossBranch::kContrastive);
  EXPECT_EQ(ev.total, ev.l_cl);
  c.lambda_train = 1e-9;
  EXPECT_EQ(loss_and_gradient(p, b, t, c).gradient, ev.gradient);
}

TEST(Train, ZeroEpochsReturnsInitialParams) {
  ToyFixture fx;
  TrainConfig c;
  c.epochs = 0;
  c.dim = 16;
  c.features = 256;
  c.seed = 11;
  auto res = train(fx.sentences, fx.index, fx.base, c);
  EXPECT_TRUE(res.trace.empty());
  EXPECT_EQ(res.params, EncoderParams::initialize(16, 256, 11));
}

TEST(Train, DeterministicAndLogged) {
  ToyFixture fx;
  TrainConfig c;
  c.epochs = 1;
  c.batch_size = 16;
  c.dim = 16;
  c.features = 256;
  c.seed = 3;
  auto a = train(fx.sentences, fx.index, fx.base, c);
  auto b = train(fx.sentences, fx.index, fx.base, c);
  EXPECT_EQ(a.params, b.params);
  ASSERT_EQ(a.trace.size(), fx.sentences.size() / 16);
  for (const auto& r : a.trace) {
    EXPECT_EQ(r.l_total, std::max(r.l_cl, r.lambda_lr));
  }
  std::ostringstream os;
  write_loss_log(a.trace, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "step,l_cl,lambda_lr,l_total");
}

TEST(Train, TrailingSingletonBatchIsSkipped) {
  ToyFixture fx;
  TrainConfig c;
  c.epochs = 1;
  c.batch_size = fx.sentences.size() - 1;
  c.dim = 16;
  c.features = 256;
  EXPECT_EQ(train(fx.sentences, fx.index, fx.base, c).trace.size(), 1u);
}

TEST(Train, RejectsBadConfigAndForeignIndex) {
  ToyFixture fx;
  TrainConfig c;
  c.tau_l = 0.9;
  c.tau_u = 0.5;
  EXPECT_THROW(train(fx.sentences, fx.index, fx.base, c), UsageError);
  TrainConfig ok;
  HashNgramEncoder other(EncoderParams::initialize(16, 256, 99));
  EXPECT_THROW(train(fx.sentences, fx.index, other, ok), DataError);
}

TEST(Train, DefaultsReduceLossOnToyCorpus) {
  ToyFixture fx(200);
  HashNgramEncoder base(EncoderParams::initialize(kDefaultDim, kDefaultFeatures, 0));
  auto index = build_index(fx.data.corpus, base);
  TrainConfig c;
  c.epochs = 5;
  auto res = train(index.sentences(), index, base, c);
  ASSERT_FALSE(res.trace.empty());
  const std::size_t per_epoch = res.trace.size() / 5;
  double first = 0, last = 0;
  for (std::size_t i = 0; i < per_epoch; ++i) {
    first += res.trace[i].l_total;
    last += res.trace[res.trace.size() - 1 - i].l_total;
  }
  EXPECT_LE(last, first);
}
