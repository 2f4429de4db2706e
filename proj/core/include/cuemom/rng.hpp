#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cuemom {

// splitmix64: used to derive independent per-replica seeds from
// (master_seed, replica_index) so parallel chains are reproducible
// regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replica) {
  return splitmix64(splitmix64(master) ^ (0x9e3779b97f4a7c15ULL * (replica + 1)));
}

// mt19937_64 with hand-rolled variate transforms. std::*_distribution is
// implementation-defined, which would make "identical seed => identical
// stream" depend on the standard library; these transforms do not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform on [0,1) with 53 random bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform on (0,1], safe as a log argument
  double uniform_pos() { return 1.0 - uniform(); }

  // standard Cauchy via inverse CDF
  double cauchy() { return std::tan(M_PI * (uniform() - 0.5)); }

  // standard normal, Box-Muller; one spare kept
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    double a = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cuemom
