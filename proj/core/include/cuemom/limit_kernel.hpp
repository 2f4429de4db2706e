#pragma once
// Determinantal kernel of the scaling limit of the Cayley-mapped eigenvalue
// process, and the spectral statistics built on top of it: diagonal moment
// integrals, the second moment of the linear statistic, and the Fredholm
// determinant giving that statistic's characteristic function.
//
// The kernel is
//
//   K(x, y) = (1/2pi) * Gamma(s+1)^2 / (Gamma(2s+1) Gamma(2s+2))
//             * [P(x) Q(y) - P(y) Q(x)] / (x - y),
//   P(x) = 2^(2s-1/2) Gamma(s+1/2) |x|^(-1/2) J_{s-1/2}(1/|x|),
//   Q(x) = sgn(x) 2^(2s+1/2) Gamma(s+3/2) |x|^(-1/2) J_{s+1/2}(1/|x|),
//
// defined for s > -1/2 and x, y != 0.  It is symmetric and invariant under
// (x, y) -> (-x, -y).  At s = 0 it reduces to sin((x-y)/(xy)) / (2pi (x-y)).
//
// Two normalizations coexist.  The pointwise functions below use the closed
// forms exactly as written above, with diagonal constant 1/4 and s = 0
// density 1/(2 pi x^2).  The correlation operator of the point process is
// TWICE this kernel: only 2K composes to itself (at s = 0 the substitution
// a = 1/x carries 2K to sin(a-b)/(pi(a-b)), the orthogonal projection onto
// unit-band frequencies), its Nystrom spectrum fills [0, 1], and only it
// reproduces the second moment 1/(4s^2 - 1) of the linear statistic.  The
// operator-level routines (variance_via_kernel, nystrom_operator, the
// Fredholm characteristic function) apply the factor internally.
//
// All quadrature here works in the variable z = 1/x, where the Bessel
// oscillation has unit frequency and panels can be phase-limited.

#include <complex>
#include <vector>

#include "cuemom/moment_estimate.hpp"

namespace cuemom::limit_kernel {

// The scalar factor Gamma(s+1)^2 / (2 pi Gamma(2s+1) Gamma(2s+2)) multiplying
// the P/Q bracket.  Requires s > -1/2.
double kernel_prefactor(double s);

// K(x, y).  When |x - y| < 1e-6 * max(|x|, |y|) the difference quotient is
// replaced by the diagonal closed form at the midpoint; the two branches
// agree to ~1e-8 at the switch.  Throws std::invalid_argument when s <= -1/2
// or either argument is 0 or non-finite.
double kernel_eval(double s, double x, double y);

// K(x, x) through the derivative limit of the difference quotient, reduced
// with the Bessel recurrences to
//
//   K(x, x) = (1/4) [ |x|^(-3) (J_{s+1/2}^2 + J_{s-1/2}^2)
//                     - 2s |x|^(-2) J_{s+1/2} J_{s-1/2} ],   args = 1/|x|.
//
// The constant is exactly 1/4 for every s: applying the Legendre duplication
// formula to Gamma(s+1/2)Gamma(s+1) and Gamma(s+1)Gamma(s+3/2) collapses
// 2^(4s-1) Gamma(s+1)^2 Gamma(s+1/2) Gamma(s+3/2) / (pi Gamma(2s+1)
// Gamma(2s+2)) to 2^(-2).  Even in x; at s = 0 equals 1/(2 pi x^2).
double kernel_diagonal(double s, double x);

// x^(2h)-weighted diagonal mass split at |x| = R:
//   tail = integral over |x| >= R of |x|^(2h) K(x, x) dx
//   bulk = integral over |x| <  R of  x^2     K(x, x) dx
// In z = 1/x the tail integrand behaves like z^(2s-2h) at z = 0, so the tail
// is finite iff h < s + 1/2; at or beyond that boundary the integral
// diverges and divergence_error is thrown.  Errors are self-estimates from
// order doubling plus a grading-depth shift, so values near the divergence
// boundary carry honestly wide bars.
struct TailBulk {
  double tail = 0.0;
  double bulk = 0.0;
  double tail_error = 0.0;
  double bulk_error = 0.0;
};
TailBulk moment_integrals(double s, double h, double R);

// Second moment of the centered linear statistic sum(x_i) via
//   Var = integral x^2 K(x,x) dx - double integral x y K(x,y)^2 dx dy
// with K taken in the operator normalization, over the window eps < |x| < R,
// extrapolated to eps -> 0 over the schedule {1e-2, 5e-3, 2.5e-3} with an
// empirical-order Richardson step.  The diagonal mass beyond R, an O(1/R)
// deficit, is added back from the tail integral; the double-integral tail
// decays like R^-min(2s,2) and is left to the error estimate.  Finite only
// for s > 1/2 (divergence_error otherwise).  abs_error combines the
// extrapolation spread, an R -> R/2 shift, and an order-refinement probe.
// n_nodes is the target node count over both half-axes; the panel layout is
// oscillation-limited and the per-panel order is derived from the budget.
// At s = 1 the value is 1/3, at s = 2 it is 1/15.
MomentEstimate variance_via_kernel(double s, double R = 50.0,
                                   int n_nodes = 3000);

// Symmetrized Nystrom discretization of the correlation operator 2K on
// eps < |x| < R: Gauss-Legendre nodes mapped from phase-limited panels in
// z = 1/x, mirrored about 0, and the matrix
// sym[i*n+j] = sqrt(w_i) 2K(x_i, x_j) sqrt(w_j) (row-major, real symmetric).
// Its eigenvalues lie in [0, 1] up to discretization error, with the top of
// the spectrum hugging 1 on any window wide enough to hold several modes.
struct NystromOperator {
  std::vector<double> nodes;    // ascending, symmetric about 0
  std::vector<double> weights;  // positive, include the 1/z^2 Jacobian
  std::vector<double> sym;      // n*n row-major, n = nodes.size()
};
NystromOperator nystrom_operator(double s, double eps, double R, int n_nodes);

// Characteristic function of the linear statistic at one eps:
//   phi(t) = det(I + W^(1/2) 2K W^(1/2) diag(g_t)), g_t(x) = e^(i t x / 2) - 1
// on the Nystrom grid above, via complex LU.  phi(0) = 1 exactly, and
// phi(-t) is the complex conjugate of phi(t).  Throws invalid_argument when
// the node budget cannot cover the oscillation-limited panel count at this
// eps, or when the resulting matrix dimension would exceed 3600.
std::complex<double> fredholm_char_function(double s, double t, double eps,
                                            double R, int n_nodes);

// phi(t) extrapolated over eps in {1e-2, 5e-3, 2.5e-3}.  spread combines the
// Richardson correction, the last inter-eps difference, and R-doubling and
// order-refinement probes at the coarsest eps.  When the inter-eps
// differences fail to shrink the value falls back to the finest eps and
// converged is false; no exception is thrown for that.
struct FredholmChar {
  std::complex<double> value;
  double spread = 0.0;
  bool converged = false;
};
FredholmChar fredholm_char_extrapolated(double s, double t, double R = 30.0,
                                        int n_nodes = 2600);

}  // namespace cuemom::limit_kernel
