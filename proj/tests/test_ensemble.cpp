#include "cuemom/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cuemom/errors.hpp"
#include "cuemom/exact_moments.hpp"
#include "cuemom/hp_quadrature.hpp"
#include "cuemom/rng.hpp"
#include "cuemom/specfun.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cuemom;
using namespace cuemom::ensemble;

namespace {

// Root-sum-square of two dispersion scales, for pairwise route comparisons.
double combined(double a, double b) { return std::sqrt(a * a + b * b); }

// One-sample Kolmogorov-Smirnov distance against a CDF, data pre-sorted.
template <class F>
double ks_distance(const std::vector<double>& sorted, F&& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F0 = cdf(sorted[i]);
    d = std::max(d, std::max((i + 1.0) / n - F0, F0 - i / n));
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

double cauchy_cdf(double x) { return 0.5 + std::atan(x) / M_PI; }

bool has_warning(const MomentEstimate& est, const char* needle) {
  for (const std::string& w : est.warnings)
    if (w.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("chain validation, determinism, and stream contract") {
  ChainConfig cfg;
  cfg.seed = 11;
  cfg.burn_in = 400;
  cfg.thinning = 3;
  cfg.n_samples = 40;
  cfg.replicas = 1;

  SUBCASE("config errors") {
    ChainConfig bad = cfg;
    bad.proposal_scale = 0.0;
    CHECK_THROWS_AS(HpChain(1.0, 2, bad), std::invalid_argument);
    bad = cfg;
    bad.thinning = 0;
    CHECK_THROWS_AS(HpChain(1.0, 2, bad), std::invalid_argument);
    bad = cfg;
    bad.burn_in = 0;
    CHECK_THROWS_AS(HpChain(1.0, 2, bad), std::invalid_argument);
    CHECK_THROWS_AS(HpChain(-0.6, 2, cfg), std::domain_error);
    CHECK_THROWS_AS(HpChain(1.0, 0, cfg), std::invalid_argument);
  }

  SUBCASE("identical seed gives a bit-identical stream") {
    const auto s1 = mcmc_sample_hp(1.2, 3, cfg);
    const auto s2 = mcmc_sample_hp(1.2, 3, cfg);
    REQUIRE(s1.size() == 40);
    REQUIRE(s2.size() == 40);
    for (std::size_t i = 0; i < s1.size(); ++i) {
      REQUIRE(s1[i].points.size() == 3);
      CHECK(s1[i].origin == SampleOrigin::mcmc);
      for (int j = 0; j < 3; ++j) {
        CHECK(s1[i].points[j] == s2[i].points[j]);
        CHECK(std::isfinite(s1[i].points[j]));
        if (j > 0) CHECK(s1[i].points[j] <= s1[i].points[j - 1]);
      }
    }
  }

  SUBCASE("burn-in tunes the step toward the acceptance target") {
    HpChain ch(1.2, 3, cfg);
    for (int i = 0; i < 500; ++i) ch.next();
    CHECK(ch.acceptance_rate() >= 0.2);
    CHECK(ch.acceptance_rate() <= 0.6);
    CHECK(ch.tuned_scale() > 0.0);
  }
}

TEST_CASE("single-coordinate chain reproduces the exact second moment") {
  // One coordinate at s = 1: the closed-form second moment is 1.
  const double exact = exact_moments::single_coord_even_moment(1.0, 1, 1);
  CHECK(exact == doctest::Approx(1.0).epsilon(1e-12));

  ChainConfig cfg;
  cfg.seed = 20260817;
  cfg.burn_in = 1000;
  cfg.thinning = 2;
  cfg.n_samples = 100000;
  const MomentEstimate est = abs_moment_mcmc(1.0, 1.0, 1, cfg);
  CHECK(std::abs(est.value - exact) <= 3.0 * dispersion_proxy(est));

  // The sampled weight x^2 has tail index 3/2, so the standard error is
  // withheld and the dispersion proxy carries the tail-completion term.
  CHECK(!std::isfinite(est.abs_error));
  CHECK(est.metadata.count("tail_deficit") == 1);
}

TEST_CASE("two-coordinate sum moment matches tensor quadrature") {
  const MomentEstimate oracle =
      hp_expectation(1.0, 2, [](double u) { return u * u; });
  CHECK(oracle.value == doctest::Approx(8.0 / 3.0).epsilon(1e-7));

  ChainConfig cfg;
  cfg.seed = 20260817;
  cfg.burn_in = 1500;
  cfg.thinning = 3;
  cfg.n_samples = 400000;
  const MomentEstimate est = abs_moment_mcmc(1.0, 1.0, 2, cfg);
  CHECK(std::abs(est.value - oracle.value) <= 3.0 * dispersion_proxy(est));
}

TEST_CASE("acceptance rates, symmetry, and error grants") {
  ChainConfig cfg;
  cfg.seed = 20260817;
  cfg.burn_in = 1500;
  cfg.thinning = 3;
  cfg.n_samples = 80000;
  const MomentEstimate est = abs_moment_mcmc(0.8, 0.5, 6, cfg);

  CHECK(est.metadata.at("acceptance_min") >= 0.2);
  CHECK(est.metadata.at("acceptance_max") <= 0.6);

  // The target law is symmetric, so the plain mean of sum x must vanish.
  const double mean = est.metadata.at("sum_mean");
  const double se = est.metadata.at("sum_mean_se");
  CHECK(se > 0.0);
  CHECK(std::abs(mean) <= 3.0 * se);

  // |sum x|^(4h) = |sum x|^2 is integrable here (tail index 2.6), so the
  // standard error is granted.
  CHECK(std::isfinite(est.abs_error));
  CHECK(est.abs_error > 0.0);

  // h = 0 weights are identically 1.
  const MomentEstimate one = abs_moment_mcmc(0.8, 0.0, 6, cfg);
  CHECK(one.value == 1.0);
  CHECK(one.abs_error == 0.0);
}

TEST_CASE("haar angles: uniform at N=1, Weyl repulsion at N=20") {
  SUBCASE("single angle is uniform") {
    const int n = 10000;
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) {
      const ThetaSample th = cue_sample(1, derive_seed(808, i));
      REQUIRE(th.angles.size() == 1);
      REQUIRE(th.angles[0] >= 0.0);
      REQUIRE(th.angles[0] < 2.0 * M_PI);
      u[i] = th.angles[0] / (2.0 * M_PI);
    }
    std::sort(u.begin(), u.end());
    CHECK(ks_distance(u, [](double x) { return x; }) < 1.628 / std::sqrt(n));
  }

  SUBCASE("angle differences follow the two-point density") {
    // Binned counts of ordered angle differences against the analytic
    // pair density N^2/(2 pi) - sin^2(N d/2) / (2 pi sin^2(d/2)),
    // integrated per bin.  Chi-square at the 1% level, 35 dof.
    const int N = 20, draws = 1500, B = 36;
    const double width = 2.0 * M_PI / B;
    std::vector<double> counts(B, 0.0);
    for (int d = 0; d < draws; ++d) {
      const ThetaSample th = cue_sample(N, derive_seed(4242, d));
      for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q) {
          if (p == q) continue;
          double diff = th.angles[q] - th.angles[p];
          if (diff < 0.0) diff += 2.0 * M_PI;
          counts[std::min(static_cast<int>(diff / width), B - 1)] += 1.0;
        }
    }
    auto rho = [&](double d) {
      const double sh = std::sin(0.5 * d);
      if (std::abs(sh) < 1e-12) return 0.0;
      const double kn = std::sin(0.5 * N * d) / sh;
      return (N * N - kn * kn) / (2.0 * M_PI);
    };
    double chi2 = 0.0, total = 0.0;
    for (int b = 0; b < B; ++b) {
      const double e =
          draws * testutil::integrate(rho, b * width, (b + 1) * width, 1e-10);
      total += e;
      chi2 += (counts[b] - e) * (counts[b] - e) / e;
    }
    CHECK(total == doctest::Approx(draws * N * (N - 1.0)).epsilon(1e-6));
    CHECK(chi2 < 57.34);
  }
}

TEST_CASE("cayley bridge to the s=0 ensemble") {
  SUBCASE("angle pi maps to zero") {
    ThetaSample th;
    th.angles = {M_PI};
    const EigenvalueSample ev = cayley_transform(th);
    CHECK(std::abs(ev.points[0]) < 1e-15);
    CHECK(ev.origin == SampleOrigin::cue_cayley);
  }

  SUBCASE("an exact zero angle is perturbed, not infinite") {
    ThetaSample th;
    th.angles = {0.0, M_PI};
    const EigenvalueSample ev = cayley_transform(th);
    CHECK(std::isfinite(ev.points[0]));
    CHECK(ev.points[0] > 1e200);
  }

  SUBCASE("output is sorted non-increasing") {
    ThetaSample th;
    th.angles = {1.0, 4.0, 2.5, 6.0};
    const EigenvalueSample ev = cayley_transform(th);
    for (std::size_t j = 1; j < ev.points.size(); ++j)
      CHECK(ev.points[j] <= ev.points[j - 1]);
  }

  SUBCASE("single angle pushes forward to the standard Cauchy") {
    // The s = 0 one-point density is the standard Cauchy; tie the KS
    // reference to the density routine the rest of the library exposes.
    for (double x : {0.0, 0.7, -2.0})
      CHECK(specfun::pearson_iv_density(0.0, x) ==
            doctest::Approx(1.0 / (M_PI * (1.0 + x * x))).epsilon(1e-12));
    const int n = 10000;
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i)
      c[i] = cayley_transform(cue_sample(1, derive_seed(808, i))).points[0];
    std::sort(c.begin(), c.end());
    CHECK(ks_distance(c, cauchy_cdf) < 1.628 / std::sqrt(n));
  }
}

TEST_CASE("metropolis and cayley samplers agree at s=0") {
  // Cross-validation on E[|sum x|^(1/4)] at N = 10: small enough exponent
  // that both estimators have finite variance against the Cauchy-like tail.
  ChainConfig cfg;
  cfg.seed = 20260817;
  cfg.burn_in = 1500;
  cfg.thinning = 5;
  cfg.n_samples = 120000;
  const MomentEstimate m = abs_moment_mcmc(0.0, 0.125, 10, cfg);

  const int R = 8, per = 2000;
  std::vector<double> block(R, 0.0);
  for (int r = 0; r < R; ++r) {
    double acc = 0.0;
    for (int i = 0; i < per; ++i) {
      const EigenvalueSample ev =
          cayley_transform(cue_sample(10, derive_seed(777, r * per + i)));
      double sum = 0.0;
      for (double v : ev.points) sum += v;
      acc += std::pow(std::abs(sum), 0.25);
    }
    block[r] = acc / per;
  }
  double g = 0.0;
  for (double v : block) g += v;
  g /= R;
  double var = 0.0;
  for (double v : block) var += (v - g) * (v - g);
  const double se = std::sqrt(var / (R * (R - 1.0)));

  CHECK(std::abs(m.value - g) <= 3.0 * combined(dispersion_proxy(m), se));

  // Same laws coordinate by coordinate: compare the largest point of each
  // configuration across the two samplers.
  const int n = 4000;
  ChainConfig scfg;
  scfg.seed = 31;
  scfg.burn_in = 2000;
  scfg.thinning = 20;
  scfg.n_samples = n;
  scfg.replicas = 1;
  const auto stream = mcmc_sample_hp(0.0, 10, scfg);
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) a[i] = stream[i].points.front();
  for (int i = 0; i < n; ++i)
    b[i] = cayley_transform(cue_sample(10, derive_seed(555, i))).points.front();
  CHECK(ks_two_sample(a, b) < 1.628 * std::sqrt(2.0 / n));
}

TEST_CASE("joint moment from unitary samples") {
  SUBCASE("h = 0 reduces to the characteristic-polynomial moment") {
    const MomentEstimate est = joint_moment_cue(1.0, 0.0, 5, 200000, 20260817);
    // F_N(1, 0) = N + 1.
    CHECK(std::abs(est.value - 6.0) <= 3.0 * dispersion_proxy(est));
    CHECK(std::isfinite(est.abs_error));
  }

  SUBCASE("one-dimensional closed form") {
    // At N = 1 the weight is cos^2(theta/2), whose Haar average is 1/2.
    const MomentEstimate est = joint_moment_cue(1.0, 1.0, 1, 200000, 20260817);
    CHECK(std::abs(est.value - 0.5) <= 3.0 * dispersion_proxy(est));
  }

  SUBCASE("s = h = 0 weight is identically one") {
    const MomentEstimate est = joint_moment_cue(0.0, 0.0, 7, 1000, 20260817);
    CHECK(est.value == 1.0);
    CHECK(est.abs_error == 0.0);
  }

  SUBCASE("identical seed gives a bit-identical estimate") {
    const MomentEstimate a = joint_moment_cue(1.0, 0.5, 3, 20000, 99);
    const MomentEstimate b = joint_moment_cue(1.0, 0.5, 3, 20000, 99);
    CHECK(a.value == b.value);
    CHECK(a.abs_error == b.abs_error);
  }
}

TEST_CASE("three routes to the same joint moment") {
  // Deterministic tensor quadrature, direct unitary sampling, and the
  // eigenvalue-measure factorization F_N(s,0) 2^(-2h) E_N[|sum x|^(2h)]
  // must agree pairwise.  The factorization identity is what makes route
  // three equivalent to the other two.
  const struct {
    double s, h;
    int N;
  } tuples[] = {{1.0, 1.0, 2}, {2.0, 0.5, 2}, {0.75, 0.6, 3}};

  for (const auto& tp : tuples) {
    CAPTURE(tp.s);
    CAPTURE(tp.h);
    CAPTURE(tp.N);
    const MomentEstimate q = joint_moment_quadrature(tp.s, tp.h, tp.N);
    const MomentEstimate c = joint_moment_cue(tp.s, tp.h, tp.N, 300000, 20260817);

    ChainConfig cfg;
    cfg.seed = 20260817;
    cfg.burn_in = 1500;
    cfg.thinning = 3;
    cfg.n_samples = 400000;
    const MomentEstimate m = abs_moment_mcmc(tp.s, tp.h, tp.N, cfg);
    const double factor =
        exact_moments::F_N_s0(tp.s, tp.N) * std::pow(2.0, -2.0 * tp.h);
    const double mv = factor * m.value;
    const double me = factor * dispersion_proxy(m);

    const double qe = q.abs_error, ce = dispersion_proxy(c);
    CHECK(std::abs(q.value - c.value) <= 3.0 * combined(qe, ce));
    CHECK(std::abs(q.value - mv) <= 3.0 * combined(qe, me));
    CHECK(std::abs(c.value - mv) <= 3.0 * combined(ce, me));
  }
}

TEST_CASE("extrapolation to the limiting absolute moment") {
  SUBCASE("first absolute moment of the s=1 limit") {
    // E|X| at s = 1 equals (e^2 - 5) / (2 pi).
    const double target = (std::exp(2.0) - 5.0) / (2.0 * M_PI);
    ChainConfig cfg;
    cfg.seed = 20260817;
    cfg.burn_in = 1500;
    cfg.thinning = 2;
    cfg.n_samples = 200000;
    const MomentEstimate est = abs_moment_limit(1.0, 0.5, {8, 16, 32, 64}, cfg);
    CHECK(std::abs(est.value - target) <= 0.05 * target);
    CHECK(est.metadata.at("chi2_dof") < 25.0);
  }

  SUBCASE("second moment of the s=1 limit, heavy-tailed levels") {
    // The level weights |sum x|^2 have tail index 3/2, so per-level errors
    // are withheld and the fit runs on dispersion proxies; the combined
    // error must still cover the distance to the limit value 1/3.
    ChainConfig cfg;
    cfg.seed = 20260817;
    cfg.burn_in = 1500;
    cfg.thinning = 2;
    cfg.n_samples = 160000;
    const MomentEstimate est = abs_moment_limit(1.0, 1.0, {8, 16, 32, 64}, cfg);
    CHECK(std::abs(est.value - 1.0 / 3.0) <= 3.0 * est.abs_error);
    CHECK(std::abs(est.value - 1.0 / 3.0) <= 0.15);
    CHECK(has_warning(est, "withheld"));
  }

  SUBCASE("h = 0 is exact") {
    ChainConfig cfg;
    const MomentEstimate est = abs_moment_limit(1.0, 0.0, {8, 16, 32}, cfg);
    CHECK(est.value == 1.0);
    CHECK(est.abs_error == 0.0);
  }

  SUBCASE("domain and grid validation") {
    ChainConfig cfg;
    CHECK_THROWS_AS(abs_moment_limit(1.0, -0.1, {8, 16, 32}, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(abs_moment_limit(1.0, 1.5, {8, 16, 32}, cfg),
                    divergence_error);
    CHECK_THROWS_AS(abs_moment_limit(1.0, 0.5, {8, 16}, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(abs_moment_limit(1.0, 0.5, {8, 8, 16}, cfg),
                    std::invalid_argument);
  }
}

TEST_CASE("cayley diagonal law at dimension 16") {
  const DiagonalCheck pc = pearson_diagonal_check(0.0, 10000, 20260817);
  CHECK(pc.dim == 16);
  CHECK(pc.n_draws == 10000);
  CHECK(pc.ks_statistic < pc.ks_critical);
  CHECK(pc.two_sample_ks < pc.two_sample_critical);
  CHECK(pc.max_trace_error <= 1e-9);

  CHECK_THROWS_AS(pearson_diagonal_check(1.0, 10000, 1), std::invalid_argument);
  CHECK_THROWS_AS(pearson_diagonal_check(0.0, 50, 1), std::invalid_argument);
}

TEST_CASE("heavy-tail policy and domain edges") {
  SUBCASE("near the divergence edge the error is withheld and flagged") {
    const MomentEstimate est = joint_moment_cue(0.3, 0.75, 2, 20000, 20260817);
    CHECK(!std::isfinite(est.abs_error));
    CHECK(est.metadata.at("hill_weight_index") < 2.0);
    CHECK(est.metadata.count("tail_deficit") == 1);
    CHECK(has_warning(est, "withheld"));
    CHECK(has_warning(est, "divergence edge"));
    CHECK(dispersion_proxy(est) > 0.0);
    CHECK(std::isfinite(dispersion_proxy(est)));
  }

  SUBCASE("negative h is labeled conjectural") {
    const MomentEstimate est = joint_moment_cue(1.0, -0.25, 2, 20000, 20260817);
    CHECK(std::isfinite(est.value));
    CHECK(has_warning(est, "conjectural"));
  }

  SUBCASE("outside the finite window both routes throw") {
    ChainConfig cfg;
    CHECK_THROWS_AS(joint_moment_cue(1.0, 1.5, 2, 20000, 1), divergence_error);
    CHECK_THROWS_AS(joint_moment_cue(1.0, -0.5, 2, 20000, 1), divergence_error);
    CHECK_THROWS_AS(abs_moment_mcmc(1.0, 1.5, 2, cfg), divergence_error);
    CHECK_THROWS_AS(joint_moment_cue(-0.6, 0.0, 2, 20000, 1),
                    std::domain_error);
    CHECK_THROWS_AS(joint_moment_cue(1.0, 0.5, 0, 20000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(joint_moment_cue(1.0, 0.5, 65, 20000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(cue_sample(0, 1), std::invalid_argument);
  }
}

TEST_CASE("csv stream round-trip") {
  ChainConfig cfg;
  cfg.seed = 5;
  cfg.burn_in = 100;
  cfg.thinning = 1;
  cfg.n_samples = 3;
  cfg.replicas = 1;
  const auto samples = mcmc_sample_hp(0.5, 2, cfg);

  std::ostringstream os;
  write_sample_csv(os, samples);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "x1,x2,sum");
  int rows = 0;
  while (std::getline(is, line)) {
    double x1, x2, sum;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x1, &x2, &sum) == 3);
    CHECK(x1 == samples[rows].points[0]);
    CHECK(x2 == samples[rows].points[1]);
    CHECK(sum == x1 + x2);
    ++rows;
  }
  CHECK(rows == 3);

  std::vector<EigenvalueSample> ragged = samples;
  ragged[1].points.pop_back();
  std::ostringstream sink;
  CHECK_THROWS_AS(write_sample_csv(sink, ragged), std::invalid_argument);
}

}  // TEST_SUITE