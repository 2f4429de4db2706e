#pragma once

#include <vector>

namespace cuemom::specfun {

// log Gamma(x), x > 0
double log_gamma(double x);

// log of the Barnes G function, z > 0. G(1) = G(2) = G(3) = 1,
// G(z+1) = Gamma(z) G(z). Values are exact enough for ratios of G at
// arguments up to a few thousand (relative error ~1e-13 on the log).
double log_barnes_g(double z);
double barnes_g(double z);

// Bessel J of real order nu, argument z > 0
double bessel_j(double nu, double z);

// modified Bessel I of integer order n >= 0, z >= 0
double bessel_i(int n, double z);

// Taylor coefficients of the integer-power part of I_n(2 sqrt(t)):
//   I_n(2 sqrt(t)) = t^{n/2} * sum_{k=0}^{K} c_k t^k,  c_k = 1/(k! (k+n)!)
// Exposed so series code can build Bessel-determinant entries exactly.
std::vector<double> bessel_i_sqrt_coeffs(int n, int K);

// density of the s-deformed Cauchy law:
//   2^{2s} Gamma(s+1)^2 / (pi Gamma(2s+1)) * (1+x^2)^{-(1+s)},  s > -1/2
// s = 0 is the standard Cauchy density.
double pearson_iv_density(double s, double x);

}  // namespace cuemom::specfun
