#include "cuemom/parallel.hpp"

#include <atomic>

namespace cuemom {

namespace {
std::atomic<unsigned> g_max_threads{0};
}

void set_max_threads(unsigned n) { g_max_threads.store(n); }

unsigned max_threads() {
  unsigned n = g_max_threads.load();
  if (n == 0) {
    n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
  }
  return n;
}

double sum_ordered(const std::vector<double>& v) {
  // pairwise reduction on a scratch copy
  std::vector<double> s(v);
  std::size_t n = s.size();
  if (n == 0) return 0.0;
  while (n > 1) {
    std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) s[i] = s[2 * i] + s[2 * i + 1];
    if (n % 2) {
      s[half] = s[n - 1];
      n = half + 1;
    } else {
      n = half;
    }
  }
  return s[0];
}

}  // namespace cuemom
