#pragma once

#include <complex>
#include <vector>

namespace cuemom::exact_moments {

// log of the ensemble normalization constant
//   c_N = (2pi)^N 2^{-N^2-2sN} G(N+1) prod_{j=1}^N Gamma(2s+N-j+1)/Gamma(s+N-j+1)^2
// s > -1/2, N >= 1
double log_c_N(double s, int N);

// log of the finite-N moment at h = 0 (Barnes-G ratio):
//   G(N+2s+1) G(N+1) G(s+1)^2 / (G(N+s+1)^2 G(2s+1))
double log_F_N_s0(double s, int N);
double F_N_s0(double s, int N);

// large-N limit of F_N(s,0)/N^{s^2}: G(s+1)^2 / G(2s+1)
double log_F_limit_s0(double s);
double F_limit_s0(double s);

// 2m-th moment of one coordinate under the weight (1+x^2)^{-(N+s)}:
//   Gamma(m+1/2) Gamma(N+s-m-1/2) / (Gamma(1/2) Gamma(N+s-1/2))
// Throws divergence_error once m >= N+s-1/2.
double single_coord_even_moment(double s, int N, int m);

// Both sides of the product identity
//   z_1...z_N = (1/N!) sum_{k=1}^N (-1)^{N-k} sum_{i_1<...<i_k} (z_{i_1}+...+z_{i_k})^N
// Subset enumeration, so N is capped at 12.
struct SymmetricIdentitySides {
  std::complex<double> product;
  std::complex<double> subset_sum;
};
SymmetricIdentitySides elementary_symmetric_identity(const std::vector<std::complex<double>>& z);

// Assembles E[X^{2h}] from the k-point power-sum expectations
//   Ek[k-1] = E_k[(x_1+...+x_k)^{2h}], k = 1..2h:
//   E[X^{2h}] = (1/(2h)!) sum_k (-1)^{2h-k} C(2h,k) Ek[k-1]
// Valid for s > h - 1/2 (the inputs' moments must exist).
double even_moment_X(double s, int h, const std::vector<double>& Ek);

// Euler product over primes p <= prime_cutoff of
//   (1-1/p)^{s^2} sum_{m<=series_cutoff} (Gamma(m+s)/(m! Gamma(s)))^2 p^{-m}
// truncation_error estimates the dropped primes' contribution from the last
// log-factor times a prime-density tail bound.
struct ArithmeticConstant {
  double value;
  double truncation_error;
  long primes_used;
};
ArithmeticConstant arithmetic_constant(double s, long prime_cutoff = 100000,
                                       int series_cutoff = 60);

// a(s) * F_limit(s,0) * 2^{-2h} * E[|X(s)|^{2h}] with default Euler-product cutoffs
double zeta_prediction(double s, double h, double abs_moment_limit);

}  // namespace cuemom::exact_moments
