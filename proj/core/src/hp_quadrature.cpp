#include "cuemom/hp_quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace cuemom {

HpBudget hp_budget(int N) {
  if (N <= 1) return {48, 40};
  if (N == 2) return {40, 30};
  if (N == 3) return {22, 14};
  return {8, 6};
}

HpAxis hp_axis(double s, int order, int levels_out, int levels_in) {
  const double half_pi = M_PI / 2.0;
  quad::Panels panels;
  {
    // right half (0, pi/2): refine toward 0, then toward pi/2
    quad::Panels inner = quad::graded_panels(0.0, half_pi / 2.0, false, levels_in);
    quad::Panels outer = quad::graded_panels(half_pi / 2.0, half_pi, true, levels_out);
    panels = inner;
    panels.insert(panels.end(), outer.begin(), outer.end());
  }
  const quad::GaussRule& rule = quad::gauss_legendre(order);
  HpAxis ax;
  const std::size_t n_half = panels.size() * rule.x.size();
  ax.theta.reserve(2 * n_half);
  ax.weight.reserve(2 * n_half);
  // negative half first, exactly mirrored so odd integrands cancel to
  // rounding; ascending order within each half is irrelevant to the sum
  for (int sign : {-1, +1}) {
    for (const quad::Panel& p : panels) {
      const double mid = 0.5 * (p.a + p.b);
      const double hw = 0.5 * (p.b - p.a);
      for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const double th = sign * (mid + hw * rule.x[i]);
        ax.theta.push_back(th);
        ax.weight.push_back(hw * rule.w[i] *
                            std::pow(std::cos(th), 2.0 * s));
      }
    }
  }
  ax.tan_t.resize(ax.theta.size());
  ax.sin_t.resize(ax.theta.size());
  ax.cos_t.resize(ax.theta.size());
  for (std::size_t i = 0; i < ax.theta.size(); ++i) {
    ax.tan_t[i] = std::tan(ax.theta[i]);
    ax.sin_t[i] = std::sin(ax.theta[i]);
    ax.cos_t[i] = std::cos(ax.theta[i]);
  }
  return ax;
}

MomentEstimate joint_moment_quadrature(double s, double h, int N, int order) {
  if (!(h > -0.5 && h < s + 0.5))
    throw divergence_error(
        "joint_moment_quadrature: finite only for -1/2 < h < s + 1/2");
  HpBudget b = hp_budget(N);
  std::vector<std::string> warnings;
  if (h < 0.0) {
    // |sum|^{2h} is singular on the sum-zero set; deepen the cusp grading.
    if (N <= 2) {
      b.levels_in = 80;
    } else {
      warnings.push_back(
          "negative-h cusp under-resolved at N >= 3; error widened");
    }
  }
  MomentEstimate e =
      hp_expectation(s, N, detail::AbsPower(2.0 * h), order, &b);
  const double scale =
      exact_moments::F_N_s0(s, N) * std::exp2(-2.0 * h);
  MomentEstimate out;
  out.value = scale * e.value;
  out.abs_error = scale * e.abs_error;
  if (h < 0.0 && N >= 3) {
    const double delta = (M_PI / 4.0) * std::ldexp(1.0, 1 - b.levels_in);
    out.abs_error += out.value * std::pow(delta, 2.0 * h + 1.0);
  }
  out.method = Method::quadrature;
  out.metadata = e.metadata;
  out.warnings = warnings;
  return out;
}

MomentEstimate x_even_moment_quadrature(double s, int h, int order) {
  if (h < 1 || h > 2)
    throw std::invalid_argument(
        "x_even_moment_quadrature: h must be 1 or 2 (tensor budget)");
  if (!(s > h - 0.5))
    throw divergence_error("x_even_moment_quadrature: requires s > h - 1/2");
  std::vector<double> Ek(2 * h);
  double err = 0.0;
  double lg2h = std::lgamma(2.0 * h + 1.0);
  for (int k = 1; k <= 2 * h; ++k) {
    MomentEstimate e =
        hp_expectation(s, k, detail::AbsPower(2.0 * h), order);
    Ek[k - 1] = e.value;
    // |d E[X^{2h}] / d E_k| = C(2h,k)/(2h)!
    const double c = std::exp(lg2h - std::lgamma(k + 1.0) -
                              std::lgamma(2.0 * h - k + 1.0) - lg2h);
    err += c * e.abs_error;
  }
  MomentEstimate out;
  out.value = exact_moments::even_moment_X(s, h, Ek);
  out.abs_error = err;
  out.method = Method::quadrature;
  out.metadata["k_max"] = 2.0 * h;
  return out;
}

namespace {

using cdouble = std::complex<double>;

// integral over [R, inf) of x^{-mu} e^{i kappa x} dx by the integration-by-
// parts asymptotic series, truncated at its smallest term.  Valid for
// kappa*R large; the caller guarantees kappa*R >= ~25.
cdouble tail_power_integral(double mu, double kappa, double R) {
  const cdouble ik(0.0, kappa);
  cdouble term = -std::pow(R, -mu) / ik;
  cdouble sum = term;
  double last = std::abs(term);
  for (int k = 1; k < 64; ++k) {
    term *= (mu + k - 1) / (ik * R);
    const double mag = std::abs(term);
    if (mag >= last) break;  // asymptotic optimum reached
    sum += term;
    last = mag;
    if (mag < 1e-22 * std::abs(sum)) break;
  }
  return std::exp(cdouble(0.0, kappa * R)) * sum;
}

// integral over [R, inf) of x^p (1+x^2)^{-nu} e^{i kappa x} dx.
// Expands (1+x^{-2})^{-nu} binomially (fast for R >= 1e3) and handles each
// bare power via tail_power_integral; near-zero kappa*R falls back to the
// kappa = 0 closed form, with an error O(kappa R^{2-mu}) that only arises
// for |kappa| < 1e-4.
cdouble fourier_tail(double nu, int p, double kappa, double R) {
  cdouble total(0.0, 0.0);
  double coeff = 1.0;  // (-1)^j (nu)_j / j!
  for (int j = 0; j < 12; ++j) {
    if (j > 0) coeff *= -(nu + j - 1) / j;
    const double mu = 2.0 * nu + 2.0 * j - p;
    cdouble piece;
    if (std::abs(kappa) * R >= 25.0) {
      piece = tail_power_integral(mu, kappa, R);
    } else {
      piece = cdouble(std::pow(R, 1.0 - mu) / (mu - 1.0), 0.0);
    }
    total += coeff * piece;
    if (std::abs(coeff) * std::pow(R, 1.0 - mu) < 1e-22) break;
  }
  return total;
}

struct FourierPlan {
  double nu;
  int pmax;
  double R;
  quad::Panels panels;
  int order;
};

FourierPlan make_plan(double nu, int pmax, double kappa_ref, int order) {
  FourierPlan plan;
  plan.nu = nu;
  plan.pmax = pmax;
  plan.order = order;
  const double k = std::max(std::abs(kappa_ref), 1e-30);
  plan.R = std::clamp(300.0 / k, 1e3, 3e6);
  quad::Panels ps = quad::uniform_panels(0.0, 1.0, 4);
  double lo = 1.0;
  while (lo < plan.R) {
    const double hi = std::min(2.0 * lo, plan.R);
    ps.push_back({lo, hi});
    lo = hi;
  }
  plan.panels = quad::phase_limited(std::move(ps), kappa_ref, 6.0);
  return plan;
}

// all moments p = 0..pmax in one pass over the plan's nodes
std::vector<cdouble> fourier_row(const FourierPlan& plan, double kappa) {
  std::vector<cdouble> half(plan.pmax + 1, cdouble(0.0, 0.0));
  const quad::GaussRule& rule = quad::gauss_legendre(plan.order);
  for (const quad::Panel& pn : plan.panels) {
    const double mid = 0.5 * (pn.a + pn.b);
    const double hw = 0.5 * (pn.b - pn.a);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double x = mid + hw * rule.x[i];
      const double w =
          hw * rule.w[i] * std::exp(-plan.nu * std::log1p(x * x));
      const cdouble osc = std::exp(cdouble(0.0, kappa * x)) * w;
      double xp = 1.0;
      for (int p = 0; p <= plan.pmax; ++p) {
        half[p] += osc * xp;
        xp *= x;
      }
    }
  }
  std::vector<cdouble> out(plan.pmax + 1);
  for (int p = 0; p <= plan.pmax; ++p) {
    half[p] += fourier_tail(plan.nu, p, kappa, plan.R);
    // full line by x -> -x symmetry of the weight
    out[p] = (p % 2 == 0) ? cdouble(2.0 * half[p].real(), 0.0)
                          : cdouble(0.0, 2.0 * half[p].imag());
  }
  return out;
}

// closed-form moments of the bare weight at kappa = 0
double weight_moment_exact(double nu, int p) {
  if (p % 2 == 1) return 0.0;
  const double a = (p + 1) / 2.0;
  return std::exp(std::lgamma(a) + std::lgamma(nu - a) - std::lgamma(nu));
}

double char_det(double nu, int N, const std::vector<cdouble>& row,
                double* imag_part) {
  Eigen::MatrixXcd M(N, N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) M(a, b) = row[a + b];
  const cdouble d = M.determinant();
  if (imag_part) *imag_part = d.imag();
  Eigen::MatrixXd M0(N, N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) M0(a, b) = weight_moment_exact(nu, a + b);
  return d.real() / M0.determinant();
}

void check_char_domain(double s, int N) {
  if (s <= -0.5) throw std::domain_error("char_function_N: requires s > -1/2");
  if (N < 1 || N > 4)
    throw std::invalid_argument("char_function_N: N must be in 1..4");
}

}  // namespace

std::complex<double> char_function_N(double s, int N, double t, int order) {
  check_char_domain(s, N);
  if (t == 0.0) return {1.0, 0.0};
  const double nu = N + s;
  const double kappa = t / (2.0 * N);
  FourierPlan plan = make_plan(nu, 2 * N - 2, kappa, order);
  double im = 0.0;
  const double re = char_det(nu, N, fourier_row(plan, kappa), &im);
  // the measure is x -> -x symmetric, so the exact value is real; the
  // residual imaginary part of the numerator determinant is reported
  // relative to the (real) normalization
  Eigen::MatrixXd M0(N, N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) M0(a, b) = weight_moment_exact(nu, a + b);
  return {re, im / M0.determinant()};
}

std::complex<double> fourier_weight_moment(double nu, int p, double kappa,
                                           int order) {
  if (!(nu > (p + 1) / 2.0))
    throw divergence_error("fourier_weight_moment: requires nu > (p+1)/2");
  if (p < 0) throw std::invalid_argument("fourier_weight_moment: p < 0");
  if (kappa < 0.0) return std::conj(fourier_weight_moment(nu, p, -kappa, order));
  FourierPlan plan = make_plan(nu, p, kappa, order);
  return fourier_row(plan, kappa)[p];
}

XiDerivatives xi_N_derivatives(double s, int N,
                               const std::vector<double>& t_grid, int order,
                               double fd_step) {
  check_char_domain(s, N);
  if (fd_step <= 0.0) throw std::invalid_argument("xi_N: fd_step <= 0");
  const double nu = N + s;
  const double h = fd_step;
  XiDerivatives out;
  out.xi.reserve(t_grid.size());
  out.dxi.reserve(t_grid.size());
  out.d2xi.reserve(t_grid.size());
  for (double t : t_grid) {
    // one panel layout per grid point, shared across the stencil so the
    // quadrature bias is smooth in t and cancels in the differences
    const double kmax = (std::abs(t) + 3.0 * h) / (2.0 * N);
    FourierPlan plan = make_plan(nu, 2 * N - 2, std::max(kmax, 1e-4), order);
    double phi[7];
    for (int k = -3; k <= 3; ++k) {
      const double kap = (t + k * h) / (2.0 * N);
      phi[k + 3] = char_det(nu, N, fourier_row(plan, kap), nullptr);
      if (std::abs(phi[k + 3]) < 1e-8)
        throw convergence_error(
            "xi_N: characteristic function vanishes on the stencil");
    }
    const double d1 =
        (phi[1] - 8.0 * phi[2] + 8.0 * phi[4] - phi[5]) / (12.0 * h);
    const double d2 = (-phi[1] + 16.0 * phi[2] - 30.0 * phi[3] +
                       16.0 * phi[4] - phi[5]) /
                      (12.0 * h * h);
    const double d3 = (phi[0] / 8.0 - phi[1] + (13.0 / 8.0) * phi[2] -
                       (13.0 / 8.0) * phi[4] + phi[5] - phi[6] / 8.0) /
                      (h * h * h);
    const double r1 = d1 / phi[3];
    const double r2 = d2 / phi[3];
    const double r3 = d3 / phi[3];
    out.xi.push_back(t * r1);
    out.dxi.push_back(r1 + t * (r2 - r1 * r1));
    out.d2xi.push_back(2.0 * (r2 - r1 * r1) +
                       t * (r3 - 3.0 * r1 * r2 + 2.0 * r1 * r1 * r1));
  }
  return out;
}

std::vector<double> xi_N(double s, int N, const std::vector<double>& t_grid) {
  return xi_N_derivatives(s, N, t_grid).xi;
}

}  // namespace cuemom
