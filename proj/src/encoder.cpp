#include "rankvec/encoder.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "rankvec/error.hpp"
#include "rankvec/textio.hpp"

namespace rankvec {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Byte length of the UTF-8 unit starting at s[i]; malformed sequences count
// as a single byte.
std::size_t utf8_unit_length(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  if (c >= 0xF0 && c <= 0xF4) len = 4;
  else if (c >= 0xE0) len = (c <= 0xEF) ? 3 : 1;
  else if (c >= 0xC2) len = 2;
  if (i + len > s.size()) return 1;
  for (std::size_t k = 1; k < len; ++k)
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 1;
  return len;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void l2_normalize(std::vector<double>& v) {
  const double n = norm(v);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

}  // namespace

Sentence make_sentence(std::uint64_t id, std::string text) {
  bool blank = true;
  for (unsigned char c : text)
    if (!is_space(c)) {
      blank = false;
      break;
    }
  if (blank)
    throw DataError("sentence " + std::to_string(id) +
                    " is empty after trimming");
  return Sentence{id, std::move(text)};
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                         : static_cast<char>(c));
  }
  return out;
}

std::vector<std::string> trigrams(std::string_view text) {
  const std::string norm_text = normalize_text(text);
  std::vector<std::string> units{"^"};
  for (std::size_t i = 0; i < norm_text.size();) {
    const std::size_t len = utf8_unit_length(norm_text, i);
    units.emplace_back(norm_text.substr(i, len));
    i += len;
  }
  units.emplace_back("$");
  std::vector<std::string> grams;
  for (std::size_t i = 0; i + 3 <= units.size(); ++i)
    grams.push_back(units[i] + units[i + 1] + units[i + 2]);
  return grams;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  return io::Fnv1a().text(bytes).value();
}

FeatureVector featurize(std::string_view text, std::size_t features) {
  if (features == 0) throw UsageError("feature dimension must be positive");
  FeatureVector f(features, 0.0);
  for (const auto& g : trigrams(text)) f[fnv1a64(g) % features] += 1.0;
  l2_normalize(f);
  return f;
}

FeatureVector featurize(const Sentence& s, std::size_t features) {
  return featurize(s.text, features);
}

double cosine(const Embedding& a, const Embedding& b) {
  return cosine(a.values(), b.values());
}

EncoderParams EncoderParams::initialize(std::size_t dim, std::size_t features,
                                        std::uint64_t seed) {
  if (dim == 0 || features == 0)
    throw UsageError("encoder dimensions must be positive");
  std::mt19937_64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(features));
  std::vector<double> values(dim * features);
  for (double& v : values) v = (2.0 * uniform01(rng) - 1.0) * scale;
  return EncoderParams{DenseMatrix(dim, features, std::move(values)), seed};
}

std::uint64_t EncoderParams::fingerprint() const {
  io::Fnv1a h;
  h.text("hash-ngram").u64(dim()).u64(features());
  for (double v : projection.values()) h.f64(v);
  return h.value();
}

void save_model(const EncoderParams& params,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  io::write_magic(out, "RKM1");
  io::write_u32(out, static_cast<std::uint32_t>(params.dim()));
  io::write_u32(out, static_cast<std::uint32_t>(params.features()));
  io::write_u64(out, params.seed);
  for (double v : params.projection.values()) io::write_f64(out, v);
  if (!out) throw DataError(path.string() + ": write failed");
}

EncoderParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open model file");
  io::Reader r(in, path.string());
  r.expect_magic("RKM1");
  const std::uint32_t dim = r.u32("dimension");
  const std::uint32_t features = r.u32("feature count");
  if (dim == 0 || features == 0)
    throw DataError(path.string() + ": zero model dimension");
  const std::uint64_t seed = r.u64("seed");
  std::vector<double> values(static_cast<std::size_t>(dim) * features);
  for (double& v : values) {
    v = r.f64("projection");
    if (!std::isfinite(v))
      throw DataError(path.string() + ": non-finite projection entry");
  }
  if (!r.at_end()) throw DataError(path.string() + ": trailing bytes");
  return EncoderParams{DenseMatrix(dim, features, std::move(values)), seed};
}

Embedding encode_features(const EncoderParams& params,
                          std::span<const double> features) {
  if (features.size() != params.features())
    throw UsageError("feature length " + std::to_string(features.size()) +
                     " does not match encoder F=" +
                     std::to_string(params.features()));
  std::vector<double> out(params.dim(), 0.0);
  for (std::size_t r = 0; r < params.dim(); ++r)
    out[r] = dot(params.projection.row(r), features);
  return Embedding(std::move(out));
}

Embedding encode(const EncoderParams& params, const Sentence& s) {
  return encode_features(params, featurize(s, params.features()));
}

FeatureVector dropout_features(std::span<const double> features, double rate,
                               std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw UsageError("dropout rate must lie in [0, 1)");
  FeatureVector out(features.begin(), features.end());
  if (rate == 0.0) return out;
  std::mt19937_64 rng(seed);
  bool any = false;
  for (double& v : out) {
    if (v == 0.0) continue;
    if (uniform01(rng) < rate) v = 0.0;
    else any = true;
  }
  if (!any) return FeatureVector(features.begin(), features.end());
  l2_normalize(out);
  return out;
}

Embedding encode_positive(const EncoderParams& params, const AugmentedPair& p) {
  const auto f = featurize(p.anchor, params.features());
  return encode_features(params, dropout_features(f, p.dropout_rate, p.rng_seed));
}

HashNgramEncoder::HashNgramEncoder(EncoderParams params)
    : params_(std::move(params)), fingerprint_(params_.fingerprint()) {}

Embedding HashNgramEncoder::encode(const Sentence& s) const {
  return rankvec::encode(params_, s);
}

std::string HashNgramEncoder::describe() const {
  return "hash-ngram(D=" + std::to_string(params_.dim()) +
         ",F=" + std::to_string(params_.features()) + ")";
}

namespace {

EmbeddingTable load_rkv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open embedding file");
  io::Reader r(in, path.string());
  r.expect_magic("RKV1");
  const std::uint32_t n = r.u32("row count");
  const std::uint32_t dim = r.u32("dimension");
  if (n == 0 || dim == 0)
    throw DataError(path.string() + ": malformed header (n=" +
                    std::to_string(n) + ", D=" + std::to_string(dim) + ")");
  EmbeddingTable table;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::vector<double> row(dim);
    for (double& v : row) {
      v = static_cast<double>(r.f32("embedding values"));
      if (!std::isfinite(v))
        throw DataError(path.string() + ": row " + std::to_string(i) +
                        " contains a non-finite value");
    }
    table.emplace(i, Embedding(std::move(row)));
  }
  if (!r.at_end()) throw DataError(path.string() + ": trailing bytes");
  return table;
}

EmbeddingTable load_tsv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  EmbeddingTable table;
  std::size_t dim = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string ctx =
        path.string() + ": row " + std::to_string(ln + 1);
    const auto cols = split(lines[ln], '\t');
    if (cols.size() != 2) throw DataError(ctx + ": expected id<TAB>values");
    std::uint64_t id = 0;
    {
      const auto idf = cols[0];
      auto res = std::from_chars(idf.data(), idf.data() + idf.size(), id);
      if (res.ec != std::errc() || res.ptr != idf.data() + idf.size() ||
          idf.empty())
        throw DataError(ctx + ": bad id \"" + std::string(idf) + "\"");
    }
    std::vector<double> row;
    for (auto field : split(cols[1], ' ')) row.push_back(parse_real(field, ctx));
    if (dim == 0) dim = row.size();
    if (row.size() != dim)
      throw DataError(ctx + ": dimension " + std::to_string(row.size()) +
                      " differs from " + std::to_string(dim));
    if (!table.emplace(id, Embedding(std::move(row))).second)
      throw DataError(ctx + ": duplicate id " + std::to_string(id));
  }
  if (table.empty()) throw DataError(path.string() + ": no embeddings");
  return table;
}

}  // namespace

EmbeddingTable load_precomputed(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".rkv") return load_rkv(path);
  if (ext == ".tsv") return load_tsv(path);
  throw DataError(path.string() +
                  ": unknown embedding file extension (expected .rkv or .tsv)");
}

void save_precomputed(const EmbeddingTable& table,
                      const std::filesystem::path& path) {
  if (table.empty()) throw UsageError("cannot save an empty embedding table");
  const std::size_t dim = table.begin()->second.dim();
  for (const auto& [id, e] : table)
    if (e.dim() != dim) throw UsageError("embedding dimensions differ");
  const auto ext = path.extension().string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  if (ext == ".rkv") {
    std::uint64_t expected = 0;
    for (const auto& [id, e] : table)
      if (id != expected++)
        throw UsageError(".rkv files require contiguous ids 0..n-1");
    io::write_magic(out, "RKV1");
    io::write_u32(out, static_cast<std::uint32_t>(table.size()));
    io::write_u32(out, static_cast<std::uint32_t>(dim));
    for (const auto& [id, e] : table)
      for (double v : e.values()) io::write_f32(out, static_cast<float>(v));
  } else if (ext == ".tsv") {
    for (const auto& [id, e] : table) {
      out << id << '\t';
      for (std::size_t k = 0; k < e.dim(); ++k) {
        if (k) out << ' ';
        out << format_real(e.values()[k]);
      }
      out << '\n';
    }
  } else {
    throw UsageError(path.string() +
                     ": unknown embedding file extension (expected .rkv or .tsv)");
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

PrecomputedEncoder::PrecomputedEncoder(EmbeddingTable table)
    : table_(std::move(table)) {
  if (table_.empty()) throw UsageError("precomputed table is empty");
  dim_ = table_.begin()->second.dim();
  io::Fnv1a h;
  h.text("precomputed").u64(dim_);
  for (const auto& [id, e] : table_) {
    if (e.dim() != dim_) throw DataError("precomputed dimensions differ");
    h.u64(id);
    for (double v : e.values()) h.f64(v);
  }
  fingerprint_ = h.value();
}

Embedding PrecomputedEncoder::encode(const Sentence& s) const {
  auto it = table_.find(s.id);
  if (it == table_.end())
    throw DataError("no precomputed embedding for sentence id " +
                    std::to_string(s.id));
  return it->second;
}

std::string PrecomputedEncoder::describe() const {
  return "precomputed(n=" + std::to_string(table_.size()) +
         ",D=" + std::to_string(dim_) + ")";
}

}  // namespace rankvec
