#include "rankvec/bench.hpp"

#include <chrono>

#include "rankvec/error.hpp"
#include "rankvec/parallel.hpp"
#include "rankvec/rank.hpp"

namespace rankvec {

std::vector<BenchRow> bench(const CorpusIndex& index, std::size_t batch_size,
                            std::size_t repeats) {
  if (batch_size == 0) throw UsageError("batch size must be positive");
  if (repeats == 0) throw UsageError("repeats must be positive");
  using clock = std::chrono::steady_clock;

  std::vector<Embedding> queries;
  for (std::size_t b = 0; b < batch_size; ++b) {
    const auto row = index.embedding(b % index.size());
    queries.emplace_back(std::vector<double>(row.begin(), row.end()));
  }

  double rank_seconds = 0.0;
  double sim_seconds = 0.0;
  const std::size_t n = index.size();
  for (std::size_t r = 0; r < repeats; ++r) {
    DenseMatrix stacked(batch_size, n);
    const auto t0 = clock::now();
    parallel_for(batch_size, [&](std::size_t b) {
      const auto u = rank_vector(index, queries[b]);
      std::copy(u.values.values().begin(), u.values.values().end(),
                stacked.mutable_row(b).begin());
    });
    const auto t1 = clock::now();
    const DenseMatrix sims = matmul(stacked, transpose(stacked));
    const auto t2 = clock::now();
    if (sims.rows() != batch_size) throw UsageError("unexpected matrix shape");
    rank_seconds += std::chrono::duration<double>(t1 - t0).count();
    sim_seconds += std::chrono::duration<double>(t2 - t1).count();
  }
  const auto reps = static_cast<double>(repeats);
  return {{"rank_vectors", batch_size, n, rank_seconds / reps},
          {"rank_similarity_matrix", batch_size, batch_size, sim_seconds / reps}};
}

}  // namespace rankvec
