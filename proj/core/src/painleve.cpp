#include "cuemom/painleve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cuemom/errors.hpp"
#include "cuemom/exact_moments.hpp"
#include "cuemom/hp_quadrature.hpp"
#include "cuemom/specfun.hpp"

namespace cuemom::painleve {

namespace {

// product truncated to a fixed length, treating missing coefficients as zero
PowerSeries mul_to(const PowerSeries& a, const PowerSeries& b, std::size_t len) {
  PowerSeries r(len);
  const std::size_t ia_max = std::min(len, a.size());
  for (std::size_t i = 0; i < ia_max; ++i) {
    if (a.c[i] == 0.0) continue;
    const std::size_t jmax = std::min(b.size(), len - i);
    for (std::size_t j = 0; j < jmax; ++j) r.c[i + j] += a.c[i] * b.c[j];
  }
  return r;
}

PowerSeries shift_up(const PowerSeries& a, std::size_t len) {
  PowerSeries r(len);
  for (std::size_t k = 1; k < len; ++k) r.c[k] = a[k - 1];
  return r;
}

// Both sides of the quadratic relation as series in t, for the scale of a
// coefficient-level defect: lhs = (t tau'')^2, rhs terms kept separate.
struct RelationSeries {
  PowerSeries lhs;
  std::array<PowerSeries, 4> rhs_terms;  // -4t(tau')^3, (4s^2+4tau)(tau')^2, t tau', -tau

  double defect(std::size_t k) const {
    double d = lhs[k];
    for (const auto& t : rhs_terms) d -= t[k];
    return d;
  }
  double scale(std::size_t k) const {
    double m = std::abs(lhs[k]);
    for (const auto& t : rhs_terms) m = std::max(m, std::abs(t[k]));
    return m;
  }
};

RelationSeries assemble_relation(const PowerSeries& tau, double s, std::size_t len) {
  PowerSeries dtau(len), t_d2tau(len);
  for (std::size_t k = 0; k + 1 < tau.size() && k < len; ++k) {
    dtau.c[k] = static_cast<double>(k + 1) * tau.c[k + 1];
    t_d2tau.c[k] = static_cast<double>((k + 1) * k) * tau.c[k + 1];
  }
  const PowerSeries dtau_sq = mul_to(dtau, dtau, len);

  RelationSeries r;
  r.lhs = mul_to(t_d2tau, t_d2tau, len);
  r.rhs_terms[0] = ps_scale(shift_up(mul_to(dtau_sq, dtau, len), len), -4.0);
  PowerSeries coef(len);
  coef.c[0] = 4.0 * s * s;
  for (std::size_t k = 0; k < len && k < tau.size(); ++k) coef.c[k] += 4.0 * tau.c[k];
  r.rhs_terms[1] = mul_to(coef, dtau_sq, len);
  r.rhs_terms[2] = shift_up(dtau, len);
  r.rhs_terms[3] = ps_scale(tau, -1.0);
  r.rhs_terms[3].c.resize(len, 0.0);
  return r;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

PowerSeries sigma_piii_series(double s, int K) {
  if (K < 2 || K > 40) throw std::invalid_argument("sigma_piii_series: requires 2 <= K <= 40");
  const double disc = 4.0 * s * s - 1.0;
  if (std::abs(disc) < 1e-9)
    throw branch_error("sigma_piii_series: quadratic coefficient is singular at s = +-1/2");

  const std::size_t len = static_cast<std::size_t>(K) + 1;
  PowerSeries tau(len);
  tau.c[2] = -1.0 / (4.0 * disc);

  for (int n = 3; n <= K; ++n) {
    const auto kn = static_cast<std::size_t>(n);
    RelationSeries rel = assemble_relation(tau, s, kn + 1);
    const double d0 = rel.defect(kn);
    const double scale = std::max(1.0, rel.scale(kn));

    // linear coefficient of a_n in lhs - rhs at order n, with a_2 as above
    const double nm1 = static_cast<double>(n - 1);
    const double lin = (4.0 * s * s - nm1 * nm1) / disc;

    if (std::abs(4.0 * s * s - nm1 * nm1) <= 1e-8 * (4.0 * s * s + nm1 * nm1)) {
      // resonant order n = 2|s|+1: solvable only if the inhomogeneity vanishes
      if (std::abs(d0) > 1e-11 * scale) {
        std::ostringstream msg;
        msg << "sigma_piii_series: resonance at order " << n << " (s = " << s
            << ") has a nonzero inhomogeneity; no power-series branch exists";
        throw branch_error(msg.str());
      }
      tau.c[kn] = 0.0;
      continue;
    }

    tau.c[kn] = -d0 / lin;
    rel = assemble_relation(tau, s, kn + 1);
    if (std::abs(rel.defect(kn)) > 1e-9 * std::max(1.0, rel.scale(kn)))
      throw std::logic_error("sigma_piii_series: order-by-order matching failed to close");
  }

  if (tau.c[2] == 0.0) throw branch_error("sigma_piii_series: trivial branch selected");
  return tau;
}

double moments_from_tau(double s, const PowerSeries& tau, int h) {
  if (h < 0) throw std::invalid_argument("moments_from_tau: requires h >= 0");
  if (2.0 * h >= 2.0 * s + 1.0 - 1e-12)
    throw divergence_error("moments_from_tau: moment of order 2h >= 2s+1 is infinite");
  if (tau.size() < static_cast<std::size_t>(2 * h) + 1)
    throw std::invalid_argument("moments_from_tau: series truncation below 2h");
  if (h == 0) return 1.0;

  const PowerSeries gen = ps_exp(ps_integrate_over_x(tau));
  const double sign = (h % 2 == 0) ? 1.0 : -1.0;
  return std::ldexp(sign * factorial(2 * h) * gen[static_cast<std::size_t>(2 * h)], 2 * h);
}

namespace {

// 50-digit working precision: the constant coefficient of the determinant is
// up to ~1.6e9 times smaller than its largest signed summand at s = 6, so
// double-precision accumulation would surrender nine digits to cancellation
using big_float = boost::multiprecision::cpp_bin_float_50;

std::vector<big_float> big_mul(const std::vector<big_float>& a, const std::vector<big_float>& b,
                               std::size_t len) {
  std::vector<big_float> r(len, big_float(0));
  for (std::size_t i = 0; i < std::min(len, a.size()); ++i) {
    if (a[i].is_zero()) continue;
    const std::size_t jmax = std::min(b.size(), len - i);
    for (std::size_t j = 0; j < jmax; ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

}  // namespace

PowerSeries bessel_det_gf(int s, int K) {
  if (s < 1 || s > 6) throw std::invalid_argument("bessel_det_gf: requires s in {1..6}");
  if (K < 2 || K > 40) throw std::invalid_argument("bessel_det_gf: requires 2 <= K <= 40");
  const std::size_t len = static_cast<std::size_t>(K) + 1;

  // entry (i,j) of the determinant is t^{(i+j-1)/2} g_{i+j-1}(t); the half
  // powers are integers in units of sqrt(t) and must total s^2 for every
  // permutation so that the t^{-s^2/2} prefactor cancels exactly
  std::vector<std::vector<big_float>> g(static_cast<std::size_t>(2 * s));
  for (int n = 1; n <= 2 * s - 1; ++n) {
    std::vector<big_float> c(len);
    big_float v(1);
    for (int k = 2; k <= n; ++k) v /= k;
    c[0] = v;  // 1/n!, then c_k = c_{k-1}/(k(k+n))
    for (int k = 1; k <= K; ++k) {
      v /= k;
      v /= k + n;
      c[static_cast<std::size_t>(k)] = v;
    }
    g[static_cast<std::size_t>(n)] = std::move(c);
  }

  std::vector<big_float> det(len, big_float(0));
  std::vector<int> perm(static_cast<std::size_t>(s));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    int inversions = 0;
    int half_power = 0;
    for (int i = 0; i < s; ++i) {
      half_power += i + perm[static_cast<std::size_t>(i)] + 1;
      for (int j = i + 1; j < s; ++j)
        if (perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)]) ++inversions;
    }
    if (half_power != s * s)
      throw std::logic_error("bessel_det_gf: half powers fail to cancel the prefactor");

    std::vector<big_float> prod = g[static_cast<std::size_t>(perm[0] + 1)];
    for (int i = 1; i < s; ++i)
      prod = big_mul(prod, g[static_cast<std::size_t>(i + perm[static_cast<std::size_t>(i)] + 1)], len);
    const big_float sign = (inversions % 2 == 0) ? 1 : -1;
    for (std::size_t k = 0; k < len; ++k) det[k] += sign * prod[k];
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<big_float> expf(len);
  expf[0] = 1;
  for (std::size_t k = 1; k < len; ++k)
    expf[k] = expf[k - 1] * big_float(-1) / big_float(2 * static_cast<int>(k));
  const std::vector<big_float> f = big_mul(expf, det, len);

  PowerSeries out(len);
  for (std::size_t k = 0; k < len; ++k) out.c[k] = static_cast<double>(f[k]);
  return out;
}

double moments_from_besseldet(int s, int h) {
  if (h < 0) throw std::invalid_argument("moments_from_besseldet: requires h >= 0");
  if (h > s)
    throw divergence_error("moments_from_besseldet: moment of order 2h > 2s is infinite");
  const int K = std::min(40, std::max(2 * h + 6, 10));
  const PowerSeries f = bessel_det_gf(s, K);
  const double sign = ((s * (s - 1) / 2 + h) % 2 == 0) ? 1.0 : -1.0;
  const double g_ratio = std::exp(-exact_moments::log_F_limit_s0(static_cast<double>(s)));
  return sign * std::ldexp(g_ratio * factorial(2 * h) * f[static_cast<std::size_t>(2 * h)], 2 * h);
}

MomentEstimate even_moment_via_series(double s, int h) {
  const int K = std::min(40, std::max(2 * h + 6, 12));
  const double value = moments_from_tau(s, sigma_piii_series(s, K), h);
  MomentEstimate est;
  est.value = value;
  est.abs_error = 1e-13 * std::abs(value);
  est.method = Method::painleve;
  est.metadata["truncation"] = static_cast<double>(K);
  return est;
}

MomentEstimate even_moment_via_besseldet(int s, int h) {
  const double value = moments_from_besseldet(s, h);
  MomentEstimate est;
  est.value = value;
  est.abs_error = 1e-12 * std::abs(value);
  est.method = Method::bessel_det;
  return est;
}

namespace {

struct SigmaState {
  double u, v, w;  // tau, tau', tau''
};

SigmaState sigma_rhs(double s, double t, const SigmaState& y) {
  // differentiating the quadratic relation once gives an explicit third
  // derivative; the relation itself is an exact first integral of this flow
  const double d3 =
      (-12.0 * t * y.v * y.v + 8.0 * (s * s + y.u) * y.v + t - 2.0 * t * y.w) / (2.0 * t * t);
  return {y.v, y.w, d3};
}

SigmaState rk4_step(double s, double t, const SigmaState& y, double h) {
  const SigmaState k1 = sigma_rhs(s, t, y);
  const SigmaState y2{y.u + 0.5 * h * k1.u, y.v + 0.5 * h * k1.v, y.w + 0.5 * h * k1.w};
  const SigmaState k2 = sigma_rhs(s, t + 0.5 * h, y2);
  const SigmaState y3{y.u + 0.5 * h * k2.u, y.v + 0.5 * h * k2.v, y.w + 0.5 * h * k2.w};
  const SigmaState k3 = sigma_rhs(s, t + 0.5 * h, y3);
  const SigmaState y4{y.u + h * k3.u, y.v + h * k3.v, y.w + h * k3.w};
  const SigmaState k4 = sigma_rhs(s, t + h, y4);
  return {y.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
          y.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
          y.w + h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w)};
}

double relation_defect(double s, double n_inv, double t, double xi, double dxi, double d2xi) {
  const double lhs = (t * d2xi) * (t * d2xi);
  const double t1 = -4.0 * t * dxi * dxi * dxi;
  const double t2 = (4.0 * s * s + 4.0 * xi + n_inv * n_inv * t * t) * dxi * dxi;
  const double t3 = t * (1.0 + 2.0 * n_inv * s - 2.0 * n_inv * n_inv * xi) * dxi;
  const double t4 = -(1.0 + 2.0 * n_inv * s - n_inv * n_inv * xi) * xi;
  const double rhs = t1 + t2 + t3 + t4;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), std::abs(t1), std::abs(t2),
                                 std::abs(t3), std::abs(t4), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

}  // namespace

std::vector<SigmaPoint> integrate_sigma(double s, const PowerSeries& tau, double t_start,
                                        double t_end, double tol) {
  if (!(t_start > 0.0) || !(t_end > t_start))
    throw std::invalid_argument("integrate_sigma: requires 0 < t_start < t_end");
  if (!(tol > 0.0) || tol > 1e-2)
    throw std::invalid_argument("integrate_sigma: requires 0 < tol <= 1e-2");
  if (tau.size() < 5) throw std::invalid_argument("integrate_sigma: series truncation below 4");

  const PowerSeries dtau = ps_derivative(tau);
  const PowerSeries d2tau = ps_derivative(dtau);
  const auto series_point = [&](double t) {
    SigmaPoint p;
    p.t = t;
    p.value = tau.eval(t);
    p.residual =
        t > 0.0 ? relation_defect(s, 0.0, t, p.value, dtau.eval(t), d2tau.eval(t)) : 0.0;
    return p;
  };

  std::vector<SigmaPoint> table;
  for (int k = 0; k < 8; ++k) table.push_back(series_point(t_start * k / 8.0));

  double t = t_start;
  SigmaState y{tau.eval(t), dtau.eval(t), d2tau.eval(t)};
  table.push_back(series_point(t_start));

  const double defect_cap = std::max(100.0 * tol, 1e-8);
  double h = std::min(t_start / 4.0, (t_end - t_start) / 16.0);
  while (t < t_end) {
    h = std::min(h, t_end - t);
    const SigmaState big = rk4_step(s, t, y, h);
    const SigmaState mid = rk4_step(s, t, y, 0.5 * h);
    const SigmaState two = rk4_step(s, t + 0.5 * h, mid, 0.5 * h);

    double err = 0.0;
    err = std::max(err, std::abs(big.u - two.u) / (std::abs(two.u) + 1.0));
    err = std::max(err, std::abs(big.v - two.v) / (std::abs(two.v) + 1.0));
    err = std::max(err, std::abs(big.w - two.w) / (std::abs(two.w) + 1.0));

    if (err <= 0.5 * tol) {
      t += h;
      y = {two.u + (two.u - big.u) / 15.0, two.v + (two.v - big.v) / 15.0,
           two.w + (two.w - big.w) / 15.0};
      const double defect = relation_defect(s, 0.0, t, y.u, y.v, y.w);
      if (defect > defect_cap) {
        std::ostringstream msg;
        msg << "integrate_sigma: quadratic relation defect " << defect << " at t = " << t
            << " exceeds " << defect_cap << "; trajectory left the solution branch";
        throw branch_error(msg.str());
      }
      table.push_back({t, y.u, defect});
    }
    const double grow = 0.9 * std::pow(0.5 * tol / std::max(err, 1e-300), 0.2);
    h *= std::clamp(grow, 0.1, 4.0);
    if (h < 1e-12)
      throw convergence_error("integrate_sigma: step size collapsed before t_end");
  }
  return table;
}

namespace {

double max_relation_defect(int s, int N, const std::vector<double>& t_grid, double n_inv,
                           double fd_step, int order) {
  const auto d = xi_N_derivatives(static_cast<double>(s), N, t_grid, order, fd_step);
  double worst = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    worst = std::max(worst, relation_defect(static_cast<double>(s), n_inv, t_grid[i], d.xi[i],
                                            d.dxi[i], d.d2xi[i]));
  return worst;
}

double certified_defect(int s, int N, const std::vector<double>& t_grid, double n_inv,
                        double fd_step, int order) {
  if (s < 1) throw std::invalid_argument("finite_N_residual: requires integer s >= 1");
  if (N < 1 || N > 4) throw std::invalid_argument("finite_N_residual: requires 1 <= N <= 4");
  if (t_grid.empty()) throw std::invalid_argument("finite_N_residual: empty grid");
  for (double t : t_grid)
    if (!(t > 0.0))
      throw std::invalid_argument("finite_N_residual: both sides vanish at t = 0; use t > 0");
  if (!(fd_step > 0.0) || fd_step > 0.5)
    throw std::invalid_argument("finite_N_residual: requires 0 < fd_step <= 0.5");

  // the measured defect is (true defect) + (stencil error); step halving
  // separates the two, and a strongly step-dependent answer that never drops
  // below 1e-2 certifies nothing
  const double r1 = max_relation_defect(s, N, t_grid, n_inv, fd_step, order);
  const double r2 = max_relation_defect(s, N, t_grid, n_inv, 0.5 * fd_step, order);
  const double lo = std::min(r1, r2), hi = std::max(r1, r2);
  if (lo > 1e-2 && hi > 4.0 * lo) {
    std::ostringstream msg;
    msg << "finite_N_residual: defect is stencil-dominated (" << r1 << " at step " << fd_step
        << " vs " << r2 << " at half step); decrease fd_step";
    throw convergence_error(msg.str());
  }
  return lo;
}

}  // namespace

double finite_N_residual(int s, int N, const std::vector<double>& t_grid, double fd_step,
                         int order) {
  return certified_defect(s, N, t_grid, 1.0 / N, fd_step, order);
}

double limit_form_residual(int s, int N, const std::vector<double>& t_grid, double fd_step,
                           int order) {
  return certified_defect(s, N, t_grid, 0.0, fd_step, order);
}

}  // namespace cuemom::painleve
