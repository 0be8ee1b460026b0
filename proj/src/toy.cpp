#include "rankvec/toy.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "rankvec/error.hpp"

namespace rankvec {

void ToyConfig::validate() const {
  if (clusters < 2) throw UsageError("clusters must be at least 2");
  if (per_cluster < 2) throw UsageError("per_cluster must be at least 2");
  if (vocab == 0 || content_words == 0)
    throw UsageError("vocab and content_words must be positive");
  if (filler_vocab == 0 && filler_words > 0)
    throw UsageError("filler_vocab must be positive when filler_words > 0");
  if (!(neighbor_rate >= 0.0 && neighbor_rate <= 1.0))
    throw UsageError("neighbor_rate must lie in [0, 1]");
  if (pairs < 2) throw UsageError("pairs must be at least 2");
}

std::size_t ring_distance(std::size_t a, std::size_t b, std::size_t clusters) {
  const std::size_t d = a > b ? a - b : b - a;
  return std::min(d, clusters - d);
}

namespace {

struct Drawn {
  std::string text;
  std::set<std::string> content;
};

class Generator {
 public:
  explicit Generator(const ToyConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    for (std::size_t c = 0; c < cfg.clusters; ++c) pools_.push_back(words(cfg.vocab));
    filler_ = words(cfg.filler_vocab);
    function_ = words(cfg.function_words);
  }

  Drawn sentence(std::size_t cluster) {
    Drawn d;
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < cfg_.content_words; ++i) {
      std::size_t pool = cluster;
      if (uniform() < cfg_.neighbor_rate)
        pool = (uniform() < 0.5) ? (cluster + 1) % cfg_.clusters
                                 : (cluster + cfg_.clusters - 1) % cfg_.clusters;
      const auto& w = pools_[pool][below(cfg_.vocab)];
      d.content.insert(w);
      tokens.push_back(w);
    }
    for (std::size_t i = 0; i < cfg_.filler_words; ++i)
      tokens.push_back(filler_[below(cfg_.filler_vocab)]);
    tokens.insert(tokens.end(), function_.begin(), function_.end());
    for (std::size_t i = tokens.size() - 1; i > 0; --i)
      std::swap(tokens[i], tokens[below(i + 1)]);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) d.text.push_back(' ');
      d.text += tokens[i];
    }
    return d;
  }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

 private:
  std::vector<std::string> words(std::size_t count) {
    static constexpr std::string_view kConsonants = "bdfgklmnprstvz";
    static constexpr std::string_view kVowels = "aeiou";
    std::vector<std::string> out;
    while (out.size() < count) {
      std::string w;
      const std::size_t syllables = 2 + below(2);
      for (std::size_t s = 0; s < syllables; ++s) {
        w.push_back(kConsonants[below(kConsonants.size())]);
        w.push_back(kVowels[below(kVowels.size())]);
      }
      if (used_.insert(w).second) out.push_back(std::move(w));
    }
    return out;
  }

  const ToyConfig& cfg_;
  std::mt19937_64 rng_;
  std::set<std::string> used_;
  std::vector<std::vector<std::string>> pools_;
  std::vector<std::string> filler_;
  std::vector<std::string> function_;
};

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t shared = 0;
  for (const auto& w : a) shared += b.count(w);
  return static_cast<double>(shared) /
         static_cast<double>(a.size() + b.size() - shared);
}

double toy_gold(const Drawn& a, const Drawn& b, std::size_t dist) {
  switch (dist) {
    case 0:
      return 3.5 + 1.5 * jaccard(a.content, b.content);
    case 1:
      return 2.0 + 1.0 * jaccard(a.content, b.content);
    case 2:
      return 1.0;
    default:
      return 0.25;
  }
}

}  // namespace

ToyDataset generate_toy(const ToyConfig& config) {
  config.validate();
  Generator gen(config);
  ToyDataset data;
  for (std::size_t c = 0; c < config.clusters; ++c)
    for (std::size_t i = 0; i < config.per_cluster; ++i) {
      data.corpus.push_back(gen.sentence(c).text);
      data.corpus_cluster.push_back(c);
    }

  // Pairs cycle through same-cluster, neighbouring, and distant clusters so
  // every similarity bucket is populated.
  for (std::size_t p = 0; p < config.pairs; ++p) {
    const std::size_t ca = gen.below(config.clusters);
    std::size_t cb = ca;
    if (p % 3 == 1) {
      cb = (ca + 1) % config.clusters;
    } else if (p % 3 == 2) {
      const std::size_t offset =
          config.clusters > 3 ? 2 + gen.below(config.clusters - 3) : 1;
      cb = (ca + offset) % config.clusters;
    }
    const auto a = gen.sentence(ca);
    const auto b = gen.sentence(cb);
    ScoredPair pair;
    pair.s1 = Sentence{2 * p, a.text};
    pair.s2 = Sentence{2 * p + 1, b.text};
    pair.gold = toy_gold(a, b, ring_distance(ca, cb, config.clusters));
    pair.gold_normalized = pair.gold / kDefaultGoldScale;
    data.pairs.push_back(std::move(pair));
    data.pair_clusters.emplace_back(ca, cb);
  }
  return data;
}

void write_toy(const ToyDataset& data, const std::filesystem::path& corpus_path,
               const std::filesystem::path& pairs_path) {
  {
    std::ofstream out(corpus_path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(corpus_path.string() + ": cannot open for writing");
    for (const auto& s : data.corpus) out << s << '\n';
  }
  std::ofstream out(pairs_path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(pairs_path.string() + ": cannot open for writing");
  write_pairs(data.pairs, out);
}

}  // namespace rankvec
