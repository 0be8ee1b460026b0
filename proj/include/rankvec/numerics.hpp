#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace rankvec {

// Non-empty vector of finite 64-bit reals.
class DenseVector {
 public:
  explicit DenseVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> values_;
};

// Row-major matrix of finite 64-bit reals with positive dimensions.
class DenseMatrix {
 public:
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  // Zero-filled.
  DenseMatrix(std::size_t rows, std::size_t cols);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> mutable_row(std::size_t r) {
    return {values_.data() + r * cols_, cols_};
  }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

struct MeanStd {
  double mean;
  double std;  // population (divides by n)
};

// Sequential left-to-right dot product. Throws UsageError on length mismatch.
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

// a.b / (|a||b|) clamped to [-1, 1]. Throws DomainError on a zero-norm input.
double cosine(std::span<const double> a, std::span<const double> b);
double cosine(const DenseVector& a, const DenseVector& b);

// Same result as cosine(a, b) when norm_a == norm(a) and norm_b == norm(b);
// lets batched callers reuse precomputed norms.
double cosine_with_norms(std::span<const double> a, double norm_a,
                         std::span<const double> b, double norm_b);

MeanStd mean_std(std::span<const double> v);
MeanStd mean_std(const DenseVector& v);

// Standard product with k-ascending accumulation per output entry, so
// results are bit-reproducible for a given build.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

bool all_finite(std::span<const double> v);

}  // namespace rankvec
