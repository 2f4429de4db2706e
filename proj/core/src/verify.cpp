#include "cuemom/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cuemom/ensemble.hpp"
#include "cuemom/errors.hpp"
#include "cuemom/exact_moments.hpp"
#include "cuemom/hp_quadrature.hpp"
#include "cuemom/limit_kernel.hpp"
#include "cuemom/moment_estimate.hpp"
#include "cuemom/painleve.hpp"
#include "cuemom/rng.hpp"

namespace cuemom::verify {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  double observed = 0.0;
  double bound = 0.0;
  std::string detail;
};

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

CheckResult run_one(const std::string& name, double time_budget,
                    const std::function<Outcome()>& body) {
  CheckResult r;
  r.name = name;
  r.time_budget = time_budget;
  const auto t0 = Clock::now();
  try {
    const Outcome o = body();
    r.observed = o.observed;
    r.bound = o.bound;
    r.detail = o.detail;
    r.passed = o.observed <= o.bound;
  } catch (const std::exception& e) {
    r.passed = false;
    r.observed = std::numeric_limits<double>::infinity();
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (r.seconds > r.time_budget) {
    r.passed = false;
    r.detail += fmt(" [exceeded %.0f s budget]", r.time_budget);
  }
  return r;
}

double rel(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// --- check bodies -----------------------------------------------------

Outcome closed_form_ladder() {
  // Injected fault for exercising the failure path end to end.
  const double shift = std::getenv("CUEMOM_VERIFY_FAULT") ? 1e-6 : 0.0;
  double worst = 0.0;
  for (int N = 1; N <= 50; ++N)
    worst = std::max(worst,
                     rel(exact_moments::F_N_s0(1.0, N), N + 1.0 + shift));
  worst = std::max(worst, rel(exact_moments::F_limit_s0(1.0), 1.0 + shift));
  worst = std::max(worst,
                   rel(exact_moments::F_limit_s0(2.0), 1.0 / 12.0 + shift));
  return {worst, 1e-10,
          fmt("F_N(1,0)=N+1 for N=1..50, limits 1 and 1/12; worst rel %.2e",
              worst)};
}

Outcome second_moment_quadrature() {
  const MomentEstimate a = x_even_moment_quadrature(1.0, 1);
  const MomentEstimate b = x_even_moment_quadrature(2.0, 1);
  const double worst =
      std::max(std::abs(a.value - 1.0 / 3.0), std::abs(b.value - 1.0 / 15.0));
  return {worst, 1e-8,
          fmt("E[X^2] via 2-D quadrature: s=1 -> %.12f, s=2 -> %.12f", a.value,
              b.value)};
}

Outcome second_moment_kernel() {
  const MomentEstimate a = limit_kernel::variance_via_kernel(1.0);
  const MomentEstimate b = limit_kernel::variance_via_kernel(2.0);
  const double worst =
      std::max(std::abs(a.value - 1.0 / 3.0), std::abs(b.value - 1.0 / 15.0));
  return {worst, 1e-3,
          fmt("kernel double integral: s=1 err %.2e, s=2 err %.2e",
              std::abs(a.value - 1.0 / 3.0), std::abs(b.value - 1.0 / 15.0))};
}

Outcome second_moment_series() {
  const MomentEstimate a = painleve::even_moment_via_series(1.0, 1);
  const MomentEstimate b = painleve::even_moment_via_series(2.0, 1);
  const double worst =
      std::max(std::abs(a.value - 1.0 / 3.0), std::abs(b.value - 1.0 / 15.0));
  return {worst, 1e-12, fmt("sigma-series a2 route: worst err %.2e", worst)};
}

Outcome second_moment_besseldet() {
  const MomentEstimate a = painleve::even_moment_via_besseldet(1, 1);
  const MomentEstimate b = painleve::even_moment_via_besseldet(2, 1);
  const double worst =
      std::max(std::abs(a.value - 1.0 / 3.0), std::abs(b.value - 1.0 / 15.0));
  return {worst, 1e-10, fmt("Bessel-determinant route: worst err %.2e", worst)};
}

Outcome fourth_moment_routes() {
  const double p = painleve::even_moment_via_series(2.0, 2).value;
  const double b = painleve::even_moment_via_besseldet(2, 2).value;
  const double q = x_even_moment_quadrature(2.0, 2).value;
  const double worst = std::max(
      {std::abs(p - b), std::abs(p - q), std::abs(b - q)});
  return {worst, 1e-4,
          fmt("E[X^4] at s=2: series %.10f, det %.10f, 4-D quad %.10f", p, b,
              q)};
}

Outcome half_integer_limit(std::uint64_t seed) {
  ensemble::ChainConfig cfg;
  cfg.seed = derive_seed(seed, 4);
  cfg.burn_in = 2000;
  cfg.thinning = 2;
  cfg.n_samples = 100000;
  const MomentEstimate est =
      ensemble::abs_moment_limit(1.0, 0.5, {25, 50, 100, 200}, cfg);
  const double target = (std::exp(2.0) - 5.0) / (2.0 * M_PI);
  const double zp = exact_moments::zeta_prediction(1.0, 0.5, est.value);
  const double worst =
      std::max(rel(est.value, target), rel(zp, 0.5 * target));
  return {worst, 0.05,
          fmt("E|X| -> %.6f (target %.6f), zeta prediction %.6f (target %.6f)",
              est.value, target, zp, 0.5 * target)};
}

Outcome finite_N_routes(std::uint64_t seed) {
  const struct {
    double s, h;
    int N;
  } tuples[] = {{1.0, 1.0, 2}, {2.0, 0.5, 2}, {0.75, 0.6, 3}};
  double worst = 0.0;
  std::ostringstream os;
  for (int i = 0; i < 3; ++i) {
    const auto& tp = tuples[i];
    const MomentEstimate q = joint_moment_quadrature(tp.s, tp.h, tp.N);
    const MomentEstimate c = ensemble::joint_moment_cue(
        tp.s, tp.h, tp.N, 300000, derive_seed(seed, 50 + i));
    ensemble::ChainConfig cfg;
    cfg.seed = derive_seed(seed, 60 + i);
    cfg.burn_in = 1500;
    cfg.thinning = 3;
    cfg.n_samples = 400000;
    const MomentEstimate m = ensemble::abs_moment_mcmc(tp.s, tp.h, tp.N, cfg);
    const double factor =
        exact_moments::F_N_s0(tp.s, tp.N) * std::pow(2.0, -2.0 * tp.h);
    const double mv = factor * m.value;
    const double me = factor * ensemble::dispersion_proxy(m);
    const double qe = q.abs_error, ce = ensemble::dispersion_proxy(c);
    const double r1 = std::abs(q.value - c.value) / std::hypot(qe, ce);
    const double r2 = std::abs(q.value - mv) / std::hypot(qe, me);
    const double r3 = std::abs(c.value - mv) / std::hypot(ce, me);
    worst = std::max({worst, r1, r2, r3});
    os << fmt("(%.2f,%.2f,%d) max %.2f combined errors; ", tp.s, tp.h, tp.N,
              std::max({r1, r2, r3}));
  }
  return {worst, 3.0, os.str()};
}

Outcome kernel_identities() {
  double worst_ratio = 0.0;
  // s = 0 diagonal closed form on a grid.
  double diag = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double x = 0.1 * k;
    diag = std::max(diag, rel(limit_kernel::kernel_diagonal(0.0, x),
                              1.0 / (2.0 * M_PI * x * x)));
  }
  worst_ratio = std::max(worst_ratio, diag / 1e-10);

  // Diagonal tail mass at s = 0, R = 1 equals 1/pi.
  const limit_kernel::TailBulk anchor = limit_kernel::moment_integrals(0.0, 0.0, 1.0);
  worst_ratio = std::max(worst_ratio, rel(anchor.tail, 1.0 / M_PI) / 1e-8);

  // In-range weighted integrals converge with small self-estimates.
  double stability = 0.0;
  const double pairs[][2] = {{1.0, 1.0}, {2.0, 2.0}, {0.75, 0.6}};
  for (const auto& p : pairs) {
    const limit_kernel::TailBulk tb =
        limit_kernel::moment_integrals(p[0], p[1], 50.0);
    if (!std::isfinite(tb.tail) || !std::isfinite(tb.bulk) ||
        !std::isfinite(tb.tail_error) || !std::isfinite(tb.bulk_error))
      return {INFINITY, 1.0, "moment integral produced a non-finite field"};
    stability = std::max(
        stability, tb.tail_error / std::max(std::abs(tb.tail), 1e-12));
    stability = std::max(
        stability, tb.bulk_error / std::max(std::abs(tb.bulk), 1e-12));
  }
  worst_ratio = std::max(worst_ratio, stability / 0.05);

  // The h = s + 1/2 boundary must be flagged as divergent.
  bool flagged = false;
  try {
    limit_kernel::moment_integrals(1.0, 1.5, 50.0);
  } catch (const divergence_error&) {
    flagged = true;
  }
  if (!flagged)
    return {INFINITY, 1.0, "divergence at h = s + 1/2 was not flagged"};

  // Operator spectrum within [0, 1].
  double spectrum = 0.0;
  for (double s : {0.0, 1.0}) {
    const limit_kernel::NystromOperator op =
        limit_kernel::nystrom_operator(s, 1e-2, 10.0, 700);
    const auto n = static_cast<Eigen::Index>(op.nodes.size());
    Eigen::Map<const Eigen::MatrixXd> m(op.sym.data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                      Eigen::EigenvaluesOnly);
    spectrum = std::max(spectrum, -es.eigenvalues().minCoeff());
    spectrum = std::max(spectrum, es.eigenvalues().maxCoeff() - 1.0);
  }
  worst_ratio = std::max(worst_ratio, spectrum / 1e-6);

  return {worst_ratio, 1.0,
          fmt("diag rel %.1e, tail anchor %.1e, stability %.1e, spectrum "
              "excess %.1e",
              diag, rel(anchor.tail, 1.0 / M_PI), stability, spectrum)};
}

Outcome fredholm_char() {
  double worst_ratio = 0.0;
  const std::complex<double> one =
      limit_kernel::fredholm_char_function(2.0, 0.0, 1e-2, 30.0, 800);
  worst_ratio = std::max(worst_ratio, std::abs(one - 1.0) / 1e-14);

  const std::complex<double> p =
      limit_kernel::fredholm_char_function(2.0, 0.7, 1e-2, 30.0, 800);
  const std::complex<double> q =
      limit_kernel::fredholm_char_function(2.0, -0.7, 1e-2, 30.0, 800);
  worst_ratio = std::max(worst_ratio, std::abs(q - std::conj(p)) / 1e-12);

  const double d = 0.5;
  const limit_kernel::FredholmChar fc =
      limit_kernel::fredholm_char_extrapolated(2.0, d);
  if (!fc.converged)
    return {INFINITY, 1.0, "eps extrapolation did not converge"};
  worst_ratio = std::max(
      worst_ratio, std::abs(fc.value.imag()) / std::max(fc.spread, 1e-6));
  const double second = -8.0 * (fc.value.real() - 1.0) / (d * d);
  const double rel_err = rel(second, 1.0 / 15.0);
  worst_ratio = std::max(worst_ratio, rel_err / 0.10);

  return {worst_ratio, 1.0,
          fmt("phi(0)-1 = %.1e, -4 d2 phi -> %.6f vs 1/15 (rel %.2e), spread "
              "%.1e",
              std::abs(one - 1.0), second, rel_err, fc.spread)};
}

Outcome finite_N_sigma() {
  const std::vector<double> grid{0.1, 0.25, 0.5, 0.75, 1.0};
  const double res = painleve::finite_N_residual(2, 2, grid);
  return {res, 1e-3,
          fmt("s=2, N=2 relation residual %.2e on t in [0.1, 1]", res)};
}

Outcome product_identity(std::uint64_t seed) {
  Rng g(derive_seed(seed, 9));
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int N = 1 + static_cast<int>(g.raw() % 8);
    std::vector<std::complex<double>> z(static_cast<std::size_t>(N));
    for (auto& v : z)
      v = std::polar(0.5 + 0.5 * g.uniform(), 2.0 * M_PI * g.uniform());
    const auto sides = exact_moments::elementary_symmetric_identity(z);
    worst = std::max(worst, std::abs(sides.product - sides.subset_sum) /
                                std::abs(sides.product));
  }
  return {worst, 1e-12, fmt("500 random vectors, N <= 8; worst rel %.2e",
                            worst)};
}

Outcome cayley_diagonal(std::uint64_t seed) {
  const ensemble::DiagonalCheck pc =
      ensemble::pearson_diagonal_check(0.0, 10000, derive_seed(seed, 10));
  const double worst_ratio =
      std::max({pc.ks_statistic / pc.ks_critical,
                pc.two_sample_ks / pc.two_sample_critical,
                pc.max_trace_error / 1e-9});
  return {worst_ratio, 1.0,
          fmt("KS %.4f (crit %.4f), exch. KS %.4f (crit %.4f), trace %.1e",
              pc.ks_statistic, pc.ks_critical, pc.two_sample_ks,
              pc.two_sample_critical, pc.max_trace_error)};
}

}  // namespace

std::vector<CheckResult> run_checks(Level level, std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back(run_one("1  closed-form ladder", 1.0, closed_form_ladder));
  out.push_back(
      run_one("2a second moment, 2-D quadrature", 10.0, second_moment_quadrature));
  if (level == Level::full)
    out.push_back(
        run_one("2b second moment, kernel variance", 60.0, second_moment_kernel));
  out.push_back(
      run_one("2c second moment, sigma series", 1.0, second_moment_series));
  out.push_back(run_one("2d second moment, Bessel determinant", 1.0,
                        second_moment_besseldet));
  if (level == Level::full) {
    out.push_back(
        run_one("3  fourth moment, three routes", 600.0, fourth_moment_routes));
    out.push_back(run_one("4  half-integer limit, MC extrapolation", 1800.0,
                          [seed] { return half_integer_limit(seed); }));
    out.push_back(run_one("5  finite-N route agreement", 600.0,
                          [seed] { return finite_N_routes(seed); }));
    out.push_back(
        run_one("6  kernel identities and spectrum", 60.0, kernel_identities));
    out.push_back(
        run_one("7  Fredholm characteristic function", 300.0, fredholm_char));
    out.push_back(run_one("8  finite-N sigma relation", 120.0, finite_N_sigma));
  }
  out.push_back(run_one("9  product identity on subset sums", 1.0,
                        [seed] { return product_identity(seed); }));
  if (level == Level::full)
    out.push_back(run_one("10 Cayley diagonal distribution", 120.0,
                          [seed] { return cayley_diagonal(seed); }));
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return true;
}

void print_report(std::ostream& os, const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    os << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
       << fmt(" (metric %.3g vs bound %.3g, %.1f s of %.0f)", r.observed,
              r.bound, r.seconds, r.time_budget)
       << '\n';
  }
}

}  // namespace cuemom::verify
