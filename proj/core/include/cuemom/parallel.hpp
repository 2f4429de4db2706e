#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace cuemom {

// Global worker cap, settable from the CLI (--threads). 0 = hardware default.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs fn(i) for i in [0,n). Results must be written to preallocated
// per-index slots and reduced in index order by the caller; that keeps every
// computation bit-identical no matter how many workers run.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned workers = max_threads();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Ordered pairwise sum; deterministic and more accurate than left-to-right.
double sum_ordered(const std::vector<double>& v);

}  // namespace cuemom
