#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rankvec/encoder.hpp"
#include "rankvec/numerics.hpp"

namespace rankvec {

struct Neighbor {
  std::uint64_t id;
  double score;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Immutable reference corpus with its embedding matrix. Sentence ids equal
// their row position. Embeddings are stored at 32-bit precision (rounded at
// build time) and widened to 64-bit, so a persisted index reproduces every
// downstream score bit for bit.
class CorpusIndex {
 public:
  CorpusIndex(std::vector<Sentence> sentences, DenseMatrix embeddings,
              std::uint64_t fingerprint);

  std::size_t size() const { return sentences_.size(); }
  std::size_t dim() const { return embeddings_.cols(); }
  std::uint64_t fingerprint() const { return fingerprint_; }

  const std::vector<Sentence>& sentences() const { return sentences_; }
  const Sentence& sentence(std::size_t i) const { return sentences_.at(i); }
  const DenseMatrix& embeddings() const { return embeddings_; }
  std::span<const double> embedding(std::size_t i) const {
    return embeddings_.row(i);
  }

  // cosine(e, V_i) for every row, in row order.
  std::vector<double> cosine_scores(const Embedding& e) const;

  // Row of the first sentence whose text equals `text` exactly.
  std::optional<std::size_t> find(std::string_view text) const;

  friend bool operator==(const CorpusIndex& a, const CorpusIndex& b) {
    return a.fingerprint_ == b.fingerprint_ && a.sentences_ == b.sentences_ &&
           a.embeddings_ == b.embeddings_;
  }

 private:
  std::vector<Sentence> sentences_;
  DenseMatrix embeddings_;
  std::uint64_t fingerprint_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> by_text_;
};

struct CorpusLine {
  std::size_t line_number;  // 1-based position in the file
  Sentence sentence;
};

// One sentence per line; LF or CRLF. Blank lines are skipped and reported
// in `warnings`. Duplicates are kept. Sentence ids count retained lines.
std::vector<CorpusLine> read_corpus(const std::filesystem::path& path,
                                    std::vector<std::string>* warnings = nullptr);

// Texts become sentences with ids 0..n-1 in order. Throws DataError if
// fewer than 2 sentences remain or an embedding has zero norm.
CorpusIndex build_index(const std::vector<std::string>& texts,
                        const Encoder& encoder);
CorpusIndex build_index(const std::filesystem::path& corpus_file,
                        const Encoder& encoder,
                        std::vector<std::string>* warnings = nullptr);

// "RKI1", u32 n, u32 D, u64 fingerprint, n x (u32 byte length, UTF-8 text),
// then an embedding block in the .rkv layout ("RKV1", u32 n, u32 D, f32s).
void save_index(const CorpusIndex& index, const std::filesystem::path& path);
CorpusIndex load_index(const std::filesystem::path& path);

// Throws DataError unless the encoder produced the index's embeddings.
void require_same_encoder(const CorpusIndex& index, const Encoder& encoder);

// Exact top-k by cosine, descending; equal scores ordered by ascending id.
std::vector<Neighbor> top_k_neighbors(const CorpusIndex& index,
                                      const Embedding& e, std::size_t k);

// |top_k(e1) ∩ top_k(e2)| by sentence id.
std::size_t neighbor_overlap(const CorpusIndex& index, const Embedding& e1,
                             const Embedding& e2, std::size_t k = 100);

// Serves the index's own embeddings for sentences whose text appears in the
// corpus. Lets a frozen base encoder be used without its parameters, e.g.
// when the index was built from precomputed vectors.
class IndexLookupEncoder final : public Encoder {
 public:
  explicit IndexLookupEncoder(const CorpusIndex& index) : index_(index) {}

  Embedding encode(const Sentence& s) const override;
  std::size_t dim() const override { return index_.dim(); }
  std::uint64_t fingerprint() const override { return index_.fingerprint(); }
  std::string describe() const override;

 private:
  const CorpusIndex& index_;
};

}  // namespace rankvec
