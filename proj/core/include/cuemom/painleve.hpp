#pragma once

#include <vector>

#include "cuemom/moment_estimate.hpp"
#include "cuemom/power_series.hpp"

namespace cuemom::painleve {

// Coefficients a_0..a_K of the nontrivial solution tau(t) = sum a_k t^k of
//
//   (t tau'')^2 = -4 t (tau')^3 + (4s^2 + 4 tau)(tau')^2 + t tau' - tau
//
// with tau(0) = tau'(0) = 0.  Order-by-order matching: a_2 = -1/(4(4s^2-1))
// selects the nontrivial branch, and each higher coefficient enters the
// order-n equation linearly with coefficient [4s^2 - (n-1)^2]/(4s^2 - 1).
// That coefficient vanishes at n = 2|s|+1; for integer s the resonant order
// is odd and its inhomogeneity vanishes by parity, so the coefficient is set
// to zero (the even solution).  Half-integer s >= 3/2 hits the resonance with
// a nonzero inhomogeneity and raises branch_error, as does s = +-1/2 where
// the a_2 formula itself is singular.  Requires 2 <= K <= 40.
PowerSeries sigma_piii_series(double s, int K);

// E[X(s)^{2h}] = 2^{2h} (-1)^h (2h)! [t^{2h}] exp(int_0^t tau(x)/x dx).
// Requires 2h <= K and 2h < 2s+1 (larger h has an infinite moment).
double moments_from_tau(double s, const PowerSeries& tau, int h);

// Taylor coefficients in t of
//
//   f(t) = e^{-t/2} t^{-s^2/2} det( I_{i+j-1}(2 sqrt(t)) )_{i,j=1..s}.
//
// Each determinant entry is t^{(i+j-1)/2} times an honest power series; the
// half powers are tracked as integers so the total exponent s^2/2 cancels the
// prefactor exactly (any permutation with a different total is an internal
// consistency failure).  s in {1..6}, 2 <= K <= 40.
PowerSeries bessel_det_gf(int s, int K);

// E[X(s)^{2h}] = (-1)^{s(s-1)/2 + h} 2^{2h} (G(2s+1)/G(s+1)^2) (2h)! [t^{2h}] f.
// Requires 0 <= h <= s (h > s has an infinite moment).
double moments_from_besseldet(int s, int h);

// MomentEstimate wrappers for the two series routes above.  The series
// arithmetic is exact recurrence work in double precision, so the reported
// error is a small multiple of machine roundoff.
MomentEstimate even_moment_via_series(double s, int h);
MomentEstimate even_moment_via_besseldet(int s, int h);

struct SigmaPoint {
  double t = 0.0;
  double value = 0.0;     // Xi(t)
  double residual = 0.0;  // defect of the quadratic relation, relative
};

// Continuation of the series solution: table of (t, Xi(t)) on [0, t_end].
// [0, t_start] is filled from the series; from t_start the ODE is integrated
// as the explicit third-order system obtained by differentiating the
// quadratic relation once (tau''' = [-12 t (tau')^2 + 8(s^2+tau) tau' + t
// - 2 t tau'']/(2t^2)), which follows the same analytic solution without any
// square-root branch.  The quadratic relation itself is monitored as a first
// integral; a relative defect above max(10*tol, 1e-8) aborts with
// branch_error naming the location.  Adaptive RK4 with local error <= tol.
std::vector<SigmaPoint> integrate_sigma(double s, const PowerSeries& tau, double t_start,
                                        double t_end, double tol);

// Max relative defect of the finite-N analogue of the quadratic relation,
//
//   (t Xi_N'')^2 = -4 t (Xi_N')^3 + (4s^2 + 4 Xi_N + t^2/N^2)(Xi_N')^2
//                  + t (1 + 2s/N - 2 Xi_N/N^2) Xi_N'
//                  - (1 + 2s/N - Xi_N/N^2) Xi_N,
//
// with Xi_N and its derivatives measured from the N-fold spectral average
// (hp_quadrature::xi_N_derivatives).  Relative means |LHS-RHS| divided by the
// largest individual term.  Each grid point is evaluated at fd_step and
// fd_step/2; if the two estimates disagree by more than a factor of 4 while
// the better one is still above 1e-2, the stencil step cannot certify the
// identity and convergence_error is raised.  t_grid must be positive (both
// sides vanish at t = 0).  s >= 1 integer, 1 <= N <= 4.
double finite_N_residual(int s, int N, const std::vector<double>& t_grid,
                         double fd_step = 1e-3, int order = 24);

// Same measurement with the N-free form of the relation evaluated on the
// finite-N data: the defect is O(1/N) and shrinks as N grows.
double limit_form_residual(int s, int N, const std::vector<double>& t_grid,
                           double fd_step = 1e-3, int order = 24);

}  // namespace cuemom::painleve
