#pragma once

// Synthetic corpus and STS-style pairs with known latent structure.
//
// Clusters sit on a ring and each owns a pool of content words. A sentence
// of cluster c draws each content word from c's pool, or with probability
// `neighbor_rate` from the pool of one of its two ring neighbours, and adds
// filler words from a global pool, plus a fixed set of function words that
// occur in every sentence. Neither kind carries meaning; the function words
// give raw embeddings a common component, as in natural text. Gold similarity
// (0-5 scale) depends on cluster distance and shared content words only:
//
//   same cluster      3.5 + 1.5 * jaccard(content words)
//   ring neighbours   2.0 + 1.0 * jaccard(content words)
//   distance 2        1.0
//   farther           0.25
//
// Direct lexical overlap between two short sentences is a noisy view of
// this; the corpus neighbourhood of a sentence is a much sharper one.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rankvec/evaluation.hpp"

namespace rankvec {

struct ToyConfig {
  std::uint64_t seed = 0;
  std::size_t clusters = 6;
  std::size_t per_cluster = 200;
  std::size_t vocab = 8;  // content words per cluster
  std::size_t pairs = 300;
  std::size_t content_words = 4;  // per sentence
  double neighbor_rate = 0.2;
  std::size_t filler_words = 1;  // per sentence
  std::size_t filler_vocab = 40;
  std::size_t function_words = 3;  // shared by every sentence, once each

  void validate() const;  // throws UsageError
};

struct ToyDataset {
  std::vector<std::string> corpus;
  std::vector<std::size_t> corpus_cluster;
  std::vector<ScoredPair> pairs;  // gold on the 0-5 scale
  std::vector<std::pair<std::size_t, std::size_t>> pair_clusters;
};

ToyDataset generate_toy(const ToyConfig& config);

std::size_t ring_distance(std::size_t a, std::size_t b, std::size_t clusters);

// Corpus: one sentence per line. Pairs: sentence1<TAB>sentence2<TAB>gold.
void write_toy(const ToyDataset& data, const std::filesystem::path& corpus_path,
               const std::filesystem::path& pairs_path);

}  // namespace rankvec
