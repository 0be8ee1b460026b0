#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rankvec/corpus.hpp"

namespace rankvec {

struct BenchRow {
  std::string stage;
  std::size_t rows;
  std::size_t cols;
  double seconds;  // mean wall time per batch
};

// Times the two per-batch stages of rank-target computation: B rank vectors
// against the whole index (O(B*D*n + B*n log n)) and the B x B rank
// similarity matrix (O(B*B*n)). Queries are corpus rows, cycled when B > n.
std::vector<BenchRow> bench(const CorpusIndex& index, std::size_t batch_size,
                            std::size_t repeats = 5);

}  // namespace rankvec
