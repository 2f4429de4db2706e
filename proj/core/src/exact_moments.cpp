#include "cuemom/exact_moments.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cuemom/errors.hpp"
#include "cuemom/specfun.hpp"

namespace cuemom::exact_moments {

namespace {
void require_params(double s, int N) {
  if (!(s > -0.5)) throw std::domain_error("requires s > -1/2, got s = " + std::to_string(s));
  if (N < 1) throw std::domain_error("requires N >= 1, got N = " + std::to_string(N));
}
}  // namespace

double log_c_N(double s, int N) {
  require_params(s, N);
  double v = N * std::log(2.0 * M_PI) -
             (static_cast<double>(N) * N + 2.0 * s * N) * M_LN2 +
             specfun::log_barnes_g(N + 1.0);
  for (int j = 1; j <= N; ++j) {
    const double a = N - j + 1.0;  // runs N, N-1, ..., 1
    v += specfun::log_gamma(2.0 * s + a) - 2.0 * specfun::log_gamma(s + a);
  }
  return v;
}

double log_F_N_s0(double s, int N) {
  require_params(s, N);
  return specfun::log_barnes_g(N + 2.0 * s + 1.0) + specfun::log_barnes_g(N + 1.0) +
         2.0 * specfun::log_barnes_g(s + 1.0) - 2.0 * specfun::log_barnes_g(N + s + 1.0) -
         specfun::log_barnes_g(2.0 * s + 1.0);
}

double F_N_s0(double s, int N) { return std::exp(log_F_N_s0(s, N)); }

double log_F_limit_s0(double s) {
  if (!(s > -0.5)) throw std::domain_error("requires s > -1/2");
  return 2.0 * specfun::log_barnes_g(s + 1.0) - specfun::log_barnes_g(2.0 * s + 1.0);
}

double F_limit_s0(double s) { return std::exp(log_F_limit_s0(s)); }

double single_coord_even_moment(double s, int N, int m) {
  require_params(s, N);
  if (m < 0) throw std::domain_error("requires m >= 0");
  if (!(static_cast<double>(m) < N + s - 0.5))
    throw divergence_error("single_coord_even_moment: x^{2m} not integrable, need m < N+s-1/2");
  return std::exp(specfun::log_gamma(m + 0.5) + specfun::log_gamma(N + s - m - 0.5) -
                  specfun::log_gamma(0.5) - specfun::log_gamma(N + s - 0.5));
}

SymmetricIdentitySides elementary_symmetric_identity(const std::vector<std::complex<double>>& z) {
  const int N = static_cast<int>(z.size());
  if (N < 1 || N > 12)
    throw std::domain_error("elementary_symmetric_identity: needs 1 <= N <= 12 (2^N subsets)");

  // subset terms reach N^N while the two sides cancel down to prod |z_i|;
  // extended precision keeps the advertised 1e-12 relative agreement honest
  using C = std::complex<long double>;
  std::vector<C> zl;
  zl.reserve(z.size());
  for (const auto& v : z) zl.emplace_back(v.real(), v.imag());

  C prod(1.0L, 0.0L);
  for (const auto& v : zl) prod *= v;

  C acc(0.0L, 0.0L);
  const unsigned total = 1u << N;
  for (unsigned mask = 1; mask < total; ++mask) {
    C sum(0.0L, 0.0L);
    for (int i = 0; i < N; ++i)
      if (mask & (1u << i)) sum += zl[static_cast<std::size_t>(i)];
    C p(1.0L, 0.0L);
    for (int e = 0; e < N; ++e) p *= sum;
    const int k = __builtin_popcount(mask);
    acc += ((N - k) % 2 == 0 ? p : -p);
  }
  long double fact = 1.0L;
  for (int i = 2; i <= N; ++i) fact *= i;
  acc /= fact;
  auto narrow = [](C v) {
    return std::complex<double>(static_cast<double>(v.real()), static_cast<double>(v.imag()));
  };
  return {narrow(prod), narrow(acc)};
}

double even_moment_X(double s, int h, const std::vector<double>& Ek) {
  if (h < 1) throw std::domain_error("even_moment_X: requires h >= 1");
  if (!(s > h - 0.5))
    throw divergence_error("even_moment_X: X^{2h} has no finite moment unless s > h - 1/2");
  if (Ek.size() != static_cast<std::size_t>(2 * h))
    throw std::invalid_argument("even_moment_X: need expectations for k = 1..2h");

  const int n = 2 * h;
  double binom = 1.0;  // C(2h, k), updated multiplicatively
  double acc = 0.0;
  for (int k = 1; k <= n; ++k) {
    binom = binom * (n - k + 1) / k;
    const double sign = ((n - k) % 2 == 0) ? 1.0 : -1.0;
    acc += sign * binom * Ek[static_cast<std::size_t>(k - 1)];
  }
  return acc * std::exp(-specfun::log_gamma(n + 1.0));
}

ArithmeticConstant arithmetic_constant(double s, long prime_cutoff, int series_cutoff) {
  if (!(s > -0.5)) throw std::domain_error("arithmetic_constant: requires s > -1/2");
  if (prime_cutoff < 2 || prime_cutoff > 50000000)
    throw std::domain_error("arithmetic_constant: prime_cutoff out of range");
  if (series_cutoff < 1) throw std::domain_error("arithmetic_constant: series_cutoff < 1");

  // sieve of Eratosthenes
  std::vector<bool> composite(static_cast<std::size_t>(prime_cutoff) + 1, false);
  double log_a = 0.0;
  double last_log_factor = 0.0;
  long nprimes = 0;
  long last_prime = 2;
  for (long p = 2; p <= prime_cutoff; ++p) {
    if (composite[static_cast<std::size_t>(p)]) continue;
    for (long q = p * p; q <= prime_cutoff; q += p) composite[static_cast<std::size_t>(q)] = true;
    ++nprimes;
    last_prime = p;

    const double invp = 1.0 / static_cast<double>(p);
    // r_m = Gamma(m+s)/(m! Gamma(s)); r_0 = 1, r_{m+1} = r_m (m+s)/(m+1)
    double r = 1.0, pw = 1.0, sum = 1.0;
    for (int m = 0; m < series_cutoff; ++m) {
      r *= (m + s) / (m + 1.0);
      pw *= invp;
      const double term = r * r * pw;
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    last_log_factor = s * s * std::log1p(-invp) + std::log(sum);
    log_a += last_log_factor;
  }

  // primes above the cutoff contribute ~ C/p^2 each with C ~ |lf_P| P^2;
  // sum over the prime tail ~ C/(P ln P) = |lf_P| P / ln P
  const double tail = std::fabs(last_log_factor) * static_cast<double>(last_prime) /
                      std::log(static_cast<double>(last_prime));
  const double value = std::exp(log_a);
  return {value, std::fabs(value) * tail, nprimes};
}

double zeta_prediction(double s, double h, double abs_moment_limit) {
  const ArithmeticConstant a = arithmetic_constant(s);
  return a.value * F_limit_s0(s) * std::exp(-2.0 * h * M_LN2) * abs_moment_limit;
}

}  // namespace cuemom::exact_moments
