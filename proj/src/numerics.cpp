#include "rankvec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rankvec/error.hpp"

namespace rankvec {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

DenseVector::DenseVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw UsageError("DenseVector must be non-empty");
  if (!all_finite(values_))
    throw DomainError("DenseVector contains a non-finite value");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0)
    throw UsageError("DenseMatrix dimensions must be positive");
  if (values_.size() != rows_ * cols_)
    throw UsageError("DenseMatrix expects " + std::to_string(rows_ * cols_) +
                     " values, got " + std::to_string(values_.size()));
  if (!all_finite(values_))
    throw DomainError("DenseMatrix contains a non-finite value");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : DenseMatrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw UsageError("dimension mismatch: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_with_norms(std::span<const double> a, double norm_a,
                         std::span<const double> b, double norm_b) {
  if (a.size() != b.size())
    throw UsageError("dimension mismatch: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  if (norm_a == 0.0 || norm_b == 0.0)
    throw DomainError("cosine of a zero-norm vector");
  return std::clamp(dot(a, b) / (norm_a * norm_b), -1.0, 1.0);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw UsageError("dimension mismatch: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  return cosine_with_norms(a, norm(a), b, norm(b));
}

double cosine(const DenseVector& a, const DenseVector& b) {
  return cosine(a.values(), b.values());
}

MeanStd mean_std(std::span<const double> v) {
  if (v.empty()) throw UsageError("mean_std of an empty sequence");
  const auto n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

MeanStd mean_std(const DenseVector& v) { return mean_std(v.values()); }

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw UsageError("matmul shape mismatch: " + std::to_string(a.rows()) +
                     "x" + std::to_string(a.cols()) + " times " +
                     std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.mutable_row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

}  // namespace rankvec
