#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rankvec/error.hpp"
#include "rankvec/numerics.hpp"
#include "rankvec/parallel.hpp"
#include "rankvec/textio.hpp"
#include "test_util.hpp"

using namespace rankvec;

TEST(DenseVector, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(DenseVector({}), UsageError);
  EXPECT_THROW(DenseVector({1.0, std::nan("")}), DomainError);
  EXPECT_THROW(DenseVector({std::numeric_limits<double>::infinity()}), DomainError);
  EXPECT_NO_THROW(DenseVector({0.0}));
}

TEST(DenseMatrix, ShapeValidation) {
  EXPECT_THROW(DenseMatrix(2, 2, {1, 2, 3}), UsageError);
  EXPECT_THROW(DenseMatrix(0, 2), UsageError);
  DenseMatrix m(2, 3);
  for (double v : m.values()) EXPECT_EQ(v, 0.0);
  m(1, 2) = 5.0;
  EXPECT_EQ(m.row(1)[2], 5.0);
}

TEST(Cosine, HandValues) {
  EXPECT_EQ(cosine(DenseVector({1, 0}), DenseVector({1, 0})), 1.0);
  EXPECT_EQ(cosine(DenseVector({1, 0}), DenseVector({0, 1})), 0.0);
  EXPECT_NEAR(cosine(DenseVector({1, 1}), DenseVector({1, 0})), 0.7071067811865475,
              1e-15);
}

TEST(Cosine, Errors) {
  EXPECT_THROW(cosine(DenseVector({1, 0}), DenseVector({1, 0, 0})), UsageError);
  EXPECT_THROW(cosine(DenseVector({0, 0}), DenseVector({1, 0})), DomainError);
}

TEST(Cosine, ClampedAndSymmetric) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    auto a = tu::random_vector(rng, 1 + t % 17);
    auto b = tu::random_vector(rng, a.size());
    const double ab = cosine(a, b);
    EXPECT_EQ(ab, cosine(b, a));
    EXPECT_LE(std::abs(ab), 1.0);
    EXPECT_LE(cosine(a, a), 1.0);
    EXPECT_NEAR(cosine(a, a), 1.0, 1e-15);
    EXPECT_EQ(cosine_with_norms(a, norm(a), b, norm(b)), ab);
  }
}

TEST(MeanStd, HandValues) {
  auto a = mean_std(DenseVector({1, 2, 3}));
  EXPECT_DOUBLE_EQ(a.mean, 2.0);
  EXPECT_NEAR(a.std, 0.816496580927726, 1e-15);
  auto b = mean_std(DenseVector({5}));
  EXPECT_EQ(b.mean, 5.0);
  EXPECT_EQ(b.std, 0.0);
  auto c = mean_std(DenseVector({2, 2, 2, 2}));
  EXPECT_EQ(c.mean, 2.0);
  EXPECT_EQ(c.std, 0.0);
}

TEST(MeanStd, ShiftInvariantStd) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    auto v = tu::random_vector(rng, 2 + t);
    auto shifted = v;
    for (auto& x : shifted) x += 10.0;
    EXPECT_NEAR(mean_std(v).std, mean_std(shifted).std, 1e-12);
    EXPECT_NEAR(mean_std(v).mean + 10.0, mean_std(shifted).mean, 1e-12);
  }
}

TEST(Matmul, HandValues) {
  auto i2 = DenseMatrix::identity(2);
  DenseMatrix a(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(matmul(i2, a), a);
  DenseMatrix z(2, 1, {0, 0});
  EXPECT_EQ(matmul(a, z), z);
  EXPECT_EQ(matmul(DenseMatrix(1, 2, {1, 2}), DenseMatrix(2, 1, {3, 4})),
            DenseMatrix(1, 1, {11}));
  EXPECT_THROW(matmul(a, DenseMatrix(3, 1)), UsageError);
}

TEST(Matmul, MatchesNaiveTripleLoopExactly) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::size_t r = 1 + rng() % 7, k = 1 + rng() % 9, c = 1 + rng() % 6;
    DenseMatrix a(r, k, tu::random_vector(rng, r * k));
    DenseMatrix b(k, c, tu::random_vector(rng, k * c));
    auto got = matmul(a, b);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < k; ++q) s += a(i, q) * b(q, j);
        EXPECT_EQ(got(i, j), s);
      }
    EXPECT_EQ(transpose(transpose(a)), a);
  }
}

TEST(Textio, RealRoundTrip) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 500; ++t) {
    const double v = tu::random_vector(rng, 1, -1e6, 1e6)[0];
    EXPECT_EQ(parse_real(format_real(v), "test"), v);
  }
  EXPECT_EQ(parse_real("+1.5", "x"), 1.5);
  EXPECT_THROW(parse_real("1.5x", "x"), DataError);
  EXPECT_THROW(parse_real("nan", "x"), DataError);
  EXPECT_THROW(parse_real("", "x"), DataError);
}

TEST(Textio, ReadLinesHandlesCrlf) {
  tu::TempDir dir;
  tu::write_file(dir / "a.txt", "one\r\ntwo\n\nthree\n");
  auto lines = read_lines(dir / "a.txt");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "one");
  EXPECT_EQ(lines[2], "");
  EXPECT_EQ(lines[3], "three");
  EXPECT_THROW(read_lines(dir / "missing.txt"), DataError);
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
  std::vector<double> serial(1000), threaded(1000);
  set_thread_count(1);
  parallel_for(serial.size(), [&](std::size_t i) { serial[i] = std::sqrt(double(i)); });
  set_thread_count(4);
  parallel_for(threaded.size(), [&](std::size_t i) { threaded[i] = std::sqrt(double(i)); });
  EXPECT_EQ(serial, threaded);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw DataError("boom");
               }),
               DataError);
  set_thread_count(1);
}
