#pragma once

// Base encoders mapping sentences to embeddings.
//
// The trainable encoder is a linear projection of hashed character-trigram
// features. Featurization is frozen as follows, and any file produced by
// this library depends on it:
//
//   1. Normalize: trim ASCII whitespace, collapse internal whitespace runs to
//      one space, lowercase ASCII letters. Non-ASCII bytes pass through.
//   2. Split into UTF-8 code points (a malformed byte counts as one unit) and
//      wrap with the boundary markers '^' and '$'. A text of L code points
//      therefore yields exactly L trigrams; "a" yields the single "^a$".
//   3. Hash each trigram's UTF-8 bytes with FNV-1a 64-bit
//      (offset 14695981039346656037, prime 1099511628211) and take the
//      result modulo F. Bucket values are occurrence counts.
//   4. L2-normalize the bucket vector.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankvec/numerics.hpp"

namespace rankvec {

inline constexpr std::size_t kDefaultDim = 64;
inline constexpr std::size_t kDefaultFeatures = 1024;
inline constexpr double kDefaultDropout = 0.1;

struct Sentence {
  std::uint64_t id = 0;
  std::string text;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Throws DataError when the text is empty after trimming.
Sentence make_sentence(std::uint64_t id, std::string text);

std::string normalize_text(std::string_view text);
std::vector<std::string> trigrams(std::string_view text);
std::uint64_t fnv1a64(std::string_view bytes);

// Dense, non-negative, unit-norm hashed trigram counts of length F.
using FeatureVector = std::vector<double>;
FeatureVector featurize(std::string_view text, std::size_t features);
FeatureVector featurize(const Sentence& s, std::size_t features);

// Encoder output. Unlike DenseVector this admits the zero vector; the
// cosine routines reject it downstream.
class Embedding {
 public:
  explicit Embedding(DenseVector v) : v_(std::move(v)) {}
  explicit Embedding(std::vector<double> v) : v_(std::move(v)) {}

  std::size_t dim() const { return v_.size(); }
  std::span<const double> values() const { return v_.values(); }
  const DenseVector& vector() const { return v_; }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  DenseVector v_;
};

double cosine(const Embedding& a, const Embedding& b);

// Trainable parameters: a D x F projection.
struct EncoderParams {
  DenseMatrix projection;
  std::uint64_t seed = 0;

  // i.i.d. uniform(-1/sqrt(F), +1/sqrt(F)) entries drawn row-major from
  // mt19937_64(seed) via the top 53 bits of each draw.
  static EncoderParams initialize(std::size_t dim, std::size_t features,
                                  std::uint64_t seed);

  std::size_t dim() const { return projection.rows(); }
  std::size_t features() const { return projection.cols(); }
  std::uint64_t fingerprint() const;

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

// Model file: "RKM1", u32 D, u32 F, u64 seed, D*F little-endian f64
// row-major. Doubles are stored exactly.
void save_model(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_model(const std::filesystem::path& path);

Embedding encode_features(const EncoderParams& params,
                          std::span<const double> features);
Embedding encode(const EncoderParams& params, const Sentence& s);

struct AugmentedPair {
  Sentence anchor;
  double dropout_rate = kDefaultDropout;
  std::uint64_t rng_seed = 0;
};

// Zeroes each nonzero coordinate independently with probability `rate`
// (draws from mt19937_64(seed), one per nonzero coordinate in index order),
// then re-normalizes. If every coordinate is dropped the input is returned
// unchanged.
FeatureVector dropout_features(std::span<const double> features, double rate,
                               std::uint64_t seed);
Embedding encode_positive(const EncoderParams& params, const AugmentedPair& p);

// Pluggable encoder backend. Implementations are immutable and safe to call
// concurrently.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual Embedding encode(const Sentence& s) const = 0;
  virtual std::size_t dim() const = 0;
  // Identifies the parameters behind the embeddings; stored in indexes.
  virtual std::uint64_t fingerprint() const = 0;
  virtual std::string describe() const = 0;
};

class HashNgramEncoder final : public Encoder {
 public:
  explicit HashNgramEncoder(EncoderParams params);

  Embedding encode(const Sentence& s) const override;
  std::size_t dim() const override { return params_.dim(); }
  std::uint64_t fingerprint() const override { return fingerprint_; }
  std::string describe() const override;

  const EncoderParams& params() const { return params_; }

 private:
  EncoderParams params_;
  std::uint64_t fingerprint_;
};

using EmbeddingTable = std::map<std::uint64_t, Embedding>;

// Embedding files. Binary (.rkv): "RKV1", u32 n, u32 D, n*D little-endian
// f32 row-major; row i has id i. Text (.tsv): one line per sentence,
// "id<TAB>v1 v2 ... vD". Format is chosen by extension.
EmbeddingTable load_precomputed(const std::filesystem::path& path);
void save_precomputed(const EmbeddingTable& table,
                      const std::filesystem::path& path);

// Looks embeddings up by sentence id.
class PrecomputedEncoder final : public Encoder {
 public:
  explicit PrecomputedEncoder(EmbeddingTable table);

  Embedding encode(const Sentence& s) const override;
  std::size_t dim() const override { return dim_; }
  std::uint64_t fingerprint() const override { return fingerprint_; }
  std::string describe() const override;

  const EmbeddingTable& table() const { return table_; }

 private:
  EmbeddingTable table_;
  std::size_t dim_;
  std::uint64_t fingerprint_;
};

}  // namespace rankvec
