#include "rankvec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "binary_io.hpp"
#include "rankvec/error.hpp"
#include "rankvec/parallel.hpp"
#include "rankvec/textio.hpp"

namespace rankvec {

CorpusIndex::CorpusIndex(std::vector<Sentence> sentences, DenseMatrix embeddings,
                         std::uint64_t fingerprint)
    : sentences_(std::move(sentences)),
      embeddings_(std::move(embeddings)),
      fingerprint_(fingerprint) {
  if (sentences_.size() < 2)
    throw DataError("corpus index needs at least 2 sentences, got " +
                    std::to_string(sentences_.size()));
  if (embeddings_.rows() != sentences_.size())
    throw UsageError("embedding rows do not match sentence count");
  norms_.resize(sentences_.size());
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    if (sentences_[i].id != i)
      throw UsageError("corpus sentence ids must equal row positions");
    norms_[i] = norm(embeddings_.row(i));
    if (norms_[i] == 0.0)
      throw DataError("corpus sentence " + std::to_string(i) +
                      " has a zero-norm embedding");
    by_text_.emplace(sentences_[i].text, i);  // keeps the first duplicate
  }
}

std::vector<double> CorpusIndex::cosine_scores(const Embedding& e) const {
  if (e.dim() != dim())
    throw UsageError("query dimension " + std::to_string(e.dim()) +
                     " does not match index dimension " + std::to_string(dim()));
  const double qn = norm(e.values());
  if (qn == 0.0) throw DomainError("cosine of a zero-norm vector");
  std::vector<double> scores(size());
  for (std::size_t i = 0; i < size(); ++i)
    scores[i] = cosine_with_norms(e.values(), qn, embeddings_.row(i), norms_[i]);
  return scores;
}

std::optional<std::size_t> CorpusIndex::find(std::string_view text) const {
  auto it = by_text_.find(std::string(text));
  if (it == by_text_.end()) return std::nullopt;
  return it->second;
}

std::vector<CorpusLine> read_corpus(const std::filesystem::path& path,
                                    std::vector<std::string>* warnings) {
  const auto lines = read_lines(path);
  std::vector<CorpusLine> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (normalize_text(lines[i]).empty()) {
      if (warnings)
        warnings->push_back(path.string() + ": line " + std::to_string(i + 1) +
                            " is blank, skipped");
      continue;
    }
    out.push_back({i + 1, Sentence{out.size(), lines[i]}});
  }
  return out;
}

namespace {

CorpusIndex build_from_lines(const std::vector<CorpusLine>& lines,
                             const Encoder& encoder, const std::string& source) {
  if (lines.size() < 2)
    throw DataError(source + ": need at least 2 non-blank sentences, got " +
                    std::to_string(lines.size()));
  const std::size_t n = lines.size();
  const std::size_t dim = encoder.dim();
  std::vector<double> values(n * dim);
  parallel_for(n, [&](std::size_t i) {
    const auto& line = lines[i];
    auto fail = [&](const std::string& why) {
      return DataError(source + ": line " + std::to_string(line.line_number) +
                       ": " + why);
    };
    Embedding e = [&] {
      try {
        return encoder.encode(line.sentence);
      } catch (const std::exception& ex) {
        throw fail(ex.what());
      }
    }();
    if (e.dim() != dim) throw fail("encoder returned a wrong dimension");
    double sq = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double v = static_cast<double>(static_cast<float>(e.values()[k]));
      if (!std::isfinite(v)) throw fail("embedding overflows 32-bit storage");
      values[i * dim + k] = v;
      sq += v * v;
    }
    if (sq == 0.0) throw fail("zero-norm embedding");
  });
  std::vector<Sentence> sentences;
  sentences.reserve(n);
  for (const auto& l : lines) sentences.push_back(l.sentence);
  return CorpusIndex(std::move(sentences), DenseMatrix(n, dim, std::move(values)),
                     encoder.fingerprint());
}

}  // namespace

CorpusIndex build_index(const std::vector<std::string>& texts,
                        const Encoder& encoder) {
  std::vector<CorpusLine> lines;
  for (std::size_t i = 0; i < texts.size(); ++i)
    lines.push_back({i + 1, make_sentence(i, texts[i])});
  return build_from_lines(lines, encoder, "corpus");
}

CorpusIndex build_index(const std::filesystem::path& corpus_file,
                        const Encoder& encoder,
                        std::vector<std::string>* warnings) {
  return build_from_lines(read_corpus(corpus_file, warnings), encoder,
                          corpus_file.string());
}

void save_index(const CorpusIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  const auto n = static_cast<std::uint32_t>(index.size());
  const auto dim = static_cast<std::uint32_t>(index.dim());
  io::write_magic(out, "RKI1");
  io::write_u32(out, n);
  io::write_u32(out, dim);
  io::write_u64(out, index.fingerprint());
  for (const auto& s : index.sentences()) {
    io::write_u32(out, static_cast<std::uint32_t>(s.text.size()));
    out.write(s.text.data(), static_cast<std::streamsize>(s.text.size()));
  }
  io::write_magic(out, "RKV1");
  io::write_u32(out, n);
  io::write_u32(out, dim);
  for (double v : index.embeddings().values())
    io::write_f32(out, static_cast<float>(v));
  if (!out) throw DataError(path.string() + ": write failed");
}

CorpusIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open index file");
  io::Reader r(in, path.string());
  r.expect_magic("RKI1");
  const std::uint32_t n = r.u32("sentence count");
  const std::uint32_t dim = r.u32("dimension");
  const std::uint64_t fingerprint = r.u64("fingerprint");
  if (n < 2 || dim == 0)
    throw DataError(path.string() + ": malformed header (n=" +
                    std::to_string(n) + ", D=" + std::to_string(dim) + ")");
  std::vector<Sentence> sentences;
  sentences.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t len = r.u32("sentence length");
    sentences.push_back(Sentence{i, r.string(len, "sentence text")});
  }
  r.expect_magic("RKV1");
  if (r.u32("embedding row count") != n || r.u32("embedding dimension") != dim)
    throw DataError(path.string() + ": embedding block shape disagrees with header");
  std::vector<double> values(static_cast<std::size_t>(n) * dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = static_cast<double>(r.f32("embedding values"));
    if (!std::isfinite(values[i]))
      throw DataError(path.string() + ": row " + std::to_string(i / dim) +
                      " contains a non-finite value");
  }
  if (!r.at_end()) throw DataError(path.string() + ": trailing bytes");
  return CorpusIndex(std::move(sentences), DenseMatrix(n, dim, std::move(values)),
                     fingerprint);
}

void require_same_encoder(const CorpusIndex& index, const Encoder& encoder) {
  if (index.fingerprint() != encoder.fingerprint())
    throw DataError("encoder fingerprint mismatch: index was built with " +
                    std::to_string(index.fingerprint()) + ", encoder " +
                    encoder.describe() + " has " +
                    std::to_string(encoder.fingerprint()));
}

std::vector<Neighbor> top_k_neighbors(const CorpusIndex& index,
                                      const Embedding& e, std::size_t k) {
  if (k < 1 || k > index.size())
    throw UsageError("k must lie in [1, " + std::to_string(index.size()) +
                     "], got " + std::to_string(k));
  const auto scores = index.cosine_scores(e);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), before);
  std::vector<Neighbor> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({order[i], scores[order[i]]});
  return out;
}

std::size_t neighbor_overlap(const CorpusIndex& index, const Embedding& e1,
                             const Embedding& e2, std::size_t k) {
  const auto a = top_k_neighbors(index, e1, k);
  const auto b = top_k_neighbors(index, e2, k);
  std::vector<char> in_a(index.size(), 0);
  for (const auto& nb : a) in_a[nb.id] = 1;
  std::size_t shared = 0;
  for (const auto& nb : b) shared += in_a[nb.id];
  return shared;
}

Embedding IndexLookupEncoder::encode(const Sentence& s) const {
  const auto row = index_.find(s.text);
  if (!row)
    throw DataError("sentence not present in the base index: \"" + s.text + "\"");
  const auto v = index_.embedding(*row);
  return Embedding(std::vector<double>(v.begin(), v.end()));
}

std::string IndexLookupEncoder::describe() const {
  return "index-lookup(n=" + std::to_string(index_.size()) +
         ",D=" + std::to_string(index_.dim()) + ")";
}

}  // namespace rankvec
