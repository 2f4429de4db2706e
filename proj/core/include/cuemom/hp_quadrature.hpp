#pragma once
// Deterministic quadrature for the N-point heavy-tailed eigenvalue ensemble
// with weight (1+x^2)^{-(N+s)} and squared Vandermonde interaction:
//
//   * hp_expectation        E_N[g(x_1+...+x_N)] by tensor-product panels,
//   * joint_moment_quadrature  the joint moment assembled from it,
//   * char_function_N       E_N[exp(i(t/2)(x_1+...+x_N)/N)] by a Heine-type
//                           reduction to 1-D Fourier moments,
//   * xi_N                  t (d/dt) log of that characteristic function.
//
// Everything is non-adaptive; errors come from comparing an order against its
// double on a fixed panel layout.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "cuemom/errors.hpp"
#include "cuemom/exact_moments.hpp"
#include "cuemom/moment_estimate.hpp"
#include "cuemom/parallel.hpp"
#include "cuemom/quadrature1d.hpp"

namespace cuemom {

// One axis of the tensor rule after the substitution x = tan(theta).  The
// density factorizes as per-axis weights times the squared Vandermonde in
// tan(theta); writing tan(ti) - tan(tj) = sin(ti-tj)/(cos(ti)cos(tj)) and
// folding every 1/cos into the axis weight leaves cos^{2s}(theta) per axis
// (independent of N) and a bare sin^2(ti-tj) per pair.
struct HpAxis {
  std::vector<double> theta;
  std::vector<double> weight;  // Gauss weight * panel Jacobian * cos^{2s}
  std::vector<double> tan_t;
  std::vector<double> sin_t;
  std::vector<double> cos_t;
};

// Panels on (-pi/2, pi/2), split at 0, graded toward +-pi/2 (levels_out, for
// the |x| -> infinity tails) and toward 0 (levels_in, for |x|^{2h} cusps with
// h < 0).
HpAxis hp_axis(double s, int order, int levels_out, int levels_in);

struct HpBudget {
  int levels_out;
  int levels_in;
};

// Default panel depths per dimension.  N <= 2 budgets resolve fractional
// exponents to ~1e-12; the N = 4 budget is tuned for smooth (integer s and h)
// integrands and the order-doubling spread reports whatever accuracy is
// actually reached.
HpBudget hp_budget(int N);

namespace detail {

// Sum of weight * Vandermonde^2 * g(sum of tan) over strictly increasing
// index tuples, times N!.  Tuples with a repeated index have a vanishing
// Vandermonde, so this equals the full tensor sum exactly while costing
// 1/N! of it.  Parallel over the leading index with an ordered reduction:
// results are bit-identical for any thread count.
template <class G>
double hp_tensor_sum(const HpAxis& ax, int N, G&& g) {
  const int M = (int)ax.theta.size();
  const double* w = ax.weight.data();
  const double* tn = ax.tan_t.data();
  const double* sn = ax.sin_t.data();
  const double* cs = ax.cos_t.data();
  std::vector<double> partial(M, 0.0);
  parallel_for(M, [&](std::size_t iu) {
    const int i = (int)iu;
    double acc = 0.0;
    switch (N) {
      case 1:
        acc = w[i] * g(tn[i]);
        break;
      case 2:
        for (int j = i + 1; j < M; ++j) {
          const double sij = sn[i] * cs[j] - cs[i] * sn[j];
          acc += w[i] * w[j] * sij * sij * g(tn[i] + tn[j]);
        }
        break;
      case 3:
        for (int j = i + 1; j < M; ++j) {
          const double sij = sn[i] * cs[j] - cs[i] * sn[j];
          const double wij = w[i] * w[j] * sij * sij;
          const double tij = tn[i] + tn[j];
          for (int k = j + 1; k < M; ++k) {
            const double sik = sn[i] * cs[k] - cs[i] * sn[k];
            const double sjk = sn[j] * cs[k] - cs[j] * sn[k];
            acc += wij * w[k] * (sik * sik) * (sjk * sjk) * g(tij + tn[k]);
          }
        }
        break;
      case 4:
        for (int j = i + 1; j < M; ++j) {
          const double sij = sn[i] * cs[j] - cs[i] * sn[j];
          const double wij = w[i] * w[j] * sij * sij;
          const double tij = tn[i] + tn[j];
          for (int k = j + 1; k < M; ++k) {
            const double sik = sn[i] * cs[k] - cs[i] * sn[k];
            const double sjk = sn[j] * cs[k] - cs[j] * sn[k];
            const double wijk = wij * w[k] * (sik * sik) * (sjk * sjk);
            const double tijk = tij + tn[k];
            for (int l = k + 1; l < M; ++l) {
              const double sil = sn[i] * cs[l] - cs[i] * sn[l];
              const double sjl = sn[j] * cs[l] - cs[j] * sn[l];
              const double skl = sn[k] * cs[l] - cs[k] * sn[l];
              const double v = sil * sjl * skl;
              acc += wijk * w[l] * v * v * g(tijk + tn[l]);
            }
          }
        }
        break;
      default:
        break;
    }
    partial[iu] = acc;
  });
  double fact = 1.0;
  for (int k = 2; k <= N; ++k) fact *= k;
  return fact * sum_ordered(partial);
}

}  // namespace detail

// E_N[g(x_1+...+x_N)], normalized analytically by N! c_N so that g == 1
// genuinely tests the closed-form normalization against the quadrature.
// Error: |result(order) - result(2*order)|.
//
// Divergent moments are detected by two probes and throw divergence_error:
// the order-doubling spread (> 10%), and a shallower tail grading (6 fewer
// outer levels; > 8% shift).  The second probe exists because a borderline
//-- logarithmically divergent -- integrand converges per panel yet keeps
// accumulating mass level by level, which order doubling alone cannot see.
// Finite moments within ~0.03 of the h = s+1/2 edge can trip it; callers
// that close to the edge should use the sampling route.
template <class G>
MomentEstimate hp_expectation(double s, int N, G&& g, int order = 0,
                              const HpBudget* budget = nullptr) {
  if (s <= -0.5) throw std::domain_error("hp_expectation: requires s > -1/2");
  if (N < 1) throw std::invalid_argument("hp_expectation: N < 1");
  if (N > 4)
    throw std::invalid_argument(
        "hp_expectation: N > 4 exceeds the tensor budget; use the sampling "
        "route");
  if (order <= 0) order = N == 1 ? 32 : N == 2 ? 24 : N == 3 ? 14 : 8;
  if (order < 8) throw std::invalid_argument("hp_expectation: order < 8");
  const HpBudget b = budget ? *budget : hp_budget(N);
  const double inv_norm =
      std::exp(-std::lgamma(N + 1.0) - exact_moments::log_c_N(s, N));
  const double r1 =
      detail::hp_tensor_sum(hp_axis(s, order, b.levels_out, b.levels_in), N, g) *
      inv_norm;
  const double r2 =
      detail::hp_tensor_sum(hp_axis(s, 2 * order, b.levels_out, b.levels_in),
                            N, g) *
      inv_norm;
  const double shallow =
      detail::hp_tensor_sum(
          hp_axis(s, order, std::max(2, b.levels_out - 6), b.levels_in), N, g) *
      inv_norm;
  const double err = std::abs(r1 - r2);
  const double scale = std::max(std::abs(r2), 1e-300);
  const double spread = err / scale;
  const double tail_shift = std::abs(shallow - r2) / scale;
  if ((spread > 0.1 && err > 1e-8) || (tail_shift > 0.08 && std::abs(shallow - r2) > 1e-8))
    throw divergence_error(
        "hp_expectation: no convergence under refinement (divergent moment?)");
  MomentEstimate est;
  est.value = r2;
  est.abs_error = std::max(err, 1e-15 * std::abs(r2));
  est.method = Method::quadrature;
  est.metadata["order"] = (double)order;
  est.metadata["spread"] = spread;
  est.metadata["tail_shift"] = tail_shift;
  return est;
}

namespace detail {

// |u|^p with a multiply-only path when p is a small integer.
struct AbsPower {
  double p;
  int m;
  bool integral;
  explicit AbsPower(double power)
      : p(power),
        m((int)std::lround(power)),
        integral(std::abs(power - std::lround(power)) < 1e-12 &&
                 std::lround(power) >= 0 && std::lround(power) <= 16) {}
  double operator()(double u) const {
    if (integral) {
      double a = std::abs(u), r = 1.0;
      for (int k = 0; k < m; ++k) r *= a;
      return r;
    }
    return std::pow(std::abs(u), p);
  }
};

}  // namespace detail

// Joint moment of |char poly|^{2s-2h} |derivative|^{2h} at finite N, via the
// finite-N analogue of the limit factorization: F_N(s,0) * 2^{-2h} *
// E_N[|x_1+...+x_N|^{2h}].  Finite for -1/2 < h < s+1/2 only.
MomentEstimate joint_moment_quadrature(double s, double h, int N,
                                       int order = 0);

// E[X^{2h}] of the limiting random variable, assembled from the k-point
// expectations E_k[(sum x)^{2h}], k = 1..2h, by the finite binomial
// inversion.  h in {1, 2}; requires s > h - 1/2.
MomentEstimate x_even_moment_quadrature(double s, int h, int order = 0);

// E_N[exp(i (t/2) (x_1+...+x_N)/N)].  Real and <= 1 in modulus up to
// quadrature error.  N <= 4.
std::complex<double> char_function_N(double s, int N, double t,
                                     int order = 24);

// Fourier moment of the bare weight over the real line:
//   integral of x^p e^{i kappa x} (1+x^2)^{-nu} dx.
// Requires nu > (p+1)/2.  Exposed for oracle tests of the tail machinery.
std::complex<double> fourier_weight_moment(double nu, int p, double kappa,
                                           int order = 24);

struct XiDerivatives {
  std::vector<double> xi;
  std::vector<double> dxi;
  std::vector<double> d2xi;
};

// Xi_N(t) = t phi'(t)/phi(t) with phi = char_function_N, plus first and
// second derivatives.  phi derivatives use order-4 central stencils with the
// documented spacing kXiFdStep; Xi', Xi'' follow by exact log-derivative
// algebra (no nested differencing).  Throws convergence_error if |phi| drops
// below 1e-8 anywhere on the stencil.
inline constexpr double kXiFdStep = 1e-3;
XiDerivatives xi_N_derivatives(double s, int N,
                               const std::vector<double>& t_grid,
                               int order = 24, double fd_step = kXiFdStep);

std::vector<double> xi_N(double s, int N, const std::vector<double>& t_grid);

}  // namespace cuemom
