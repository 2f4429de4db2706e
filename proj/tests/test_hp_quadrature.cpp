#include "cuemom/hp_quadrature.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "cuemom/errors.hpp"
#include "cuemom/exact_moments.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cuemom;
namespace em = exact_moments;

TEST_SUITE("hp_quadrature") {

TEST_CASE("fourier moments at kappa=0 match the Gamma closed form") {
  for (double nu : {1.5, 2.25, 4.0, 6.0}) {
    for (int p = 0; p <= 4; ++p) {
      if (!(nu > (p + 1) / 2.0)) continue;
      auto got = fourier_weight_moment(nu, p, 0.0);
      double want = 0.0;
      if (p % 2 == 0) {
        const double a = (p + 1) / 2.0;
        want = std::exp(std::lgamma(a) + std::lgamma(nu - a) -
                        std::lgamma(nu));
      }
      CHECK(got.real() == doctest::Approx(want).epsilon(1e-12).scale(1.0));
      CHECK(got.imag() == 0.0);
    }
  }
}

TEST_CASE("fourier moments match an independent adaptive-Simpson oracle") {
  struct Probe {
    double nu;
    int p;
    double kappa;
  };
  for (const Probe& pr : {Probe{3.0, 2, 0.7}, Probe{2.5, 0, 1.3},
                          Probe{1.3, 0, 1.1}, Probe{4.0, 3, 0.4}}) {
    const double oracle = testutil::integrate_real_line(
        [&](double x) {
          const double trig = pr.p % 2 == 0 ? std::cos(pr.kappa * x)
                                            : std::sin(pr.kappa * x);
          return std::pow(x, pr.p) * trig *
                 std::exp(-pr.nu * std::log1p(x * x));
        },
        1e-13);
    auto got = fourier_weight_moment(pr.nu, pr.p, pr.kappa);
    const double part = pr.p % 2 == 0 ? got.real() : got.imag();
    CHECK(part == doctest::Approx(oracle).epsilon(1e-9).scale(1.0));
    // parity: the complementary component vanishes identically
    CHECK((pr.p % 2 == 0 ? got.imag() : got.real()) == 0.0);
  }
}

TEST_CASE("negative kappa conjugates") {
  auto plus = fourier_weight_moment(2.5, 1, 0.9);
  auto minus = fourier_weight_moment(2.5, 1, -0.9);
  CHECK(minus.real() == doctest::Approx(plus.real()).scale(1.0));
  CHECK(minus.imag() == doctest::Approx(-plus.imag()).scale(1.0));
}

TEST_CASE("Hankel determinant of weight moments reproduces c_N") {
  // Andreief: the N-fold interaction integral equals N! det[m_{a+b}], so
  // det of the moment matrix must equal the closed-form c_N.
  {
    const double s = 1.2;
    const double nu = 2 + s;
    const double m0 = fourier_weight_moment(nu, 0, 0.0).real();
    const double m2 = fourier_weight_moment(nu, 2, 0.0).real();
    CHECK(m0 * m2 ==
          doctest::Approx(std::exp(em::log_c_N(s, 2))).epsilon(1e-12));
  }
  {
    const double s = 0.7;
    const double nu = 3 + s;
    const double m0 = fourier_weight_moment(nu, 0, 0.0).real();
    const double m2 = fourier_weight_moment(nu, 2, 0.0).real();
    const double m4 = fourier_weight_moment(nu, 4, 0.0).real();
    CHECK(m0 * m2 * m4 - m2 * m2 * m2 ==
          doctest::Approx(std::exp(em::log_c_N(s, 3))).epsilon(1e-11));
  }
}

TEST_CASE("hp_expectation: normalization g==1 returns 1") {
  for (int N : {1, 2}) {
    for (double s : {0.0, 0.5, 1.0, 2.0, 2.75}) {
      auto est = hp_expectation(s, N, [](double) { return 1.0; });
      CHECK(est.value == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  for (double s : {0.0, 1.0, 2.0}) {
    auto est = hp_expectation(s, 3, [](double) { return 1.0; }, 8);
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-10));
  }
  {
    HpBudget b{6, 4};
    auto est = hp_expectation(1.0, 4, [](double) { return 1.0; }, 8, &b);
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("hp_expectation: second-moment anchors") {
  // N=1: against the single-coordinate closed form
  auto e1 = hp_expectation(1.0, 1, [](double u) { return u * u; });
  CHECK(e1.value == doctest::Approx(1.0).epsilon(1e-10));
  auto e1b = hp_expectation(2.5, 1, [](double u) { return u * u; });
  CHECK(e1b.value ==
        doctest::Approx(em::single_coord_even_moment(2.5, 1, 1)).epsilon(1e-10));
  // N=2, s=1: forced by the limit second moment 1/3 plus the binomial
  // inversion: E_2 = 2*(1/3) + 2*E_1 = 8/3
  auto e2 = hp_expectation(1.0, 2, [](double u) { return u * u; });
  CHECK(e2.value == doctest::Approx(8.0 / 3.0).epsilon(1e-9));
  CHECK(e2.abs_error < 1e-9);
}

TEST_CASE("hp_expectation: odd integrands vanish") {
  auto o1 = hp_expectation(1.5, 2, [](double u) { return u * u * u; });
  CHECK(std::abs(o1.value) < 1e-10);
  auto o2 = hp_expectation(1.0, 3, [](double u) { return u; }, 10);
  CHECK(std::abs(o2.value) < 1e-10);
}

TEST_CASE("hp_expectation: error shrinks at least 10x per order doubling") {
  // smooth non-polynomial g; it must stay smooth under the tan
  // compactification (a factor like cos(u) would oscillate unboundedly near
  // theta = pi/2 and stall the order convergence)
  auto g = [](double u) { return (1.0 + u * u) / (9.0 + u * u); };
  auto ratio_ok = [&](double s, int N, const HpBudget* b) {
    const int o = 8;
    auto coarse = hp_expectation(s, N, g, o, b);
    auto fine = hp_expectation(s, N, g, 2 * o, b);
    // once the coarse pass is already at the roundoff plateau the ratio is
    // meaningless (integer-s integrands converge that fast at order 8)
    if (coarse.abs_error < 1e-11 * (1.0 + std::abs(coarse.value))) return;
    CHECK(fine.abs_error <=
          coarse.abs_error / 10.0 + 1e-14 * std::abs(fine.value));
  };
  for (double s : {0.0, 1.0, 2.0})
    for (int N : {1, 2}) ratio_ok(s, N, nullptr);
  HpBudget small{14, 8};  // keep the N=3 probe affordable
  ratio_ok(1.0, 3, &small);
}

TEST_CASE("hp_expectation: divergent second moment at s=1/2 is flagged") {
  // E_1[x^2] under (1+x^2)^{-3/2} diverges logarithmically
  CHECK_THROWS_AS(hp_expectation(0.5, 1, [](double u) { return u * u; }),
                  divergence_error);
}

TEST_CASE("hp_expectation: domain and budget guards") {
  CHECK_THROWS_AS(hp_expectation(-0.6, 1, [](double) { return 1.0; }),
                  std::domain_error);
  CHECK_THROWS_AS(hp_expectation(1.0, 5, [](double) { return 1.0; }),
                  std::invalid_argument);
}

static double f1_closed_form(double s, double h) {
  // one-point joint moment: 2^{1+2s-2h} Gamma(h+1/2) Gamma(s-h+1/2) /
  // (2 pi Gamma(1+s))
  return std::exp((1.0 + 2.0 * s - 2.0 * h) * std::log(2.0) +
                  std::lgamma(h + 0.5) + std::lgamma(s - h + 0.5) -
                  std::log(2.0 * M_PI) - std::lgamma(1.0 + s));
}

TEST_CASE("joint_moment_quadrature: N=1 closed Gamma form, 20 random (s,h)") {
  auto rng = testutil::test_rng();
  for (int trial = 0; trial < 20; ++trial) {
    const double s = testutil::uniform(rng, 0.2, 2.5);
    const double h = testutil::uniform(rng, 0.0, s);
    auto est = joint_moment_quadrature(s, h, 1);
    CHECK(est.value ==
          doctest::Approx(f1_closed_form(s, h)).epsilon(1e-9));
  }
}

TEST_CASE("joint_moment_quadrature: pinned examples") {
  auto a = joint_moment_quadrature(1.0, 1.0, 1);
  CHECK(a.value == doctest::Approx(0.5).epsilon(1e-9));
  auto b = joint_moment_quadrature(1.0, 0.0, 1);
  CHECK(b.value == doctest::Approx(2.0).epsilon(1e-10));
  auto c = joint_moment_quadrature(0.0, 0.0, 2);
  CHECK(c.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("joint_moment_quadrature: negative h (conjectural range)") {
  for (double h : {-0.1, -0.2}) {
    auto est = joint_moment_quadrature(1.0, h, 1);
    CHECK(est.value ==
          doctest::Approx(f1_closed_form(1.0, h)).epsilon(1e-6));
  }
}

TEST_CASE("joint_moment_quadrature: range guard") {
  CHECK_THROWS_AS(joint_moment_quadrature(1.0, 1.5, 2), divergence_error);
  CHECK_THROWS_AS(joint_moment_quadrature(1.0, -0.5, 2), divergence_error);
}

TEST_CASE("x_even_moment_quadrature: second moment equals 1/(4s^2-1)") {
  auto one = x_even_moment_quadrature(1.0, 1);
  CHECK(one.value == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  auto two = x_even_moment_quadrature(2.0, 1);
  CHECK(two.value == doctest::Approx(1.0 / 15.0).epsilon(1e-8));
  CHECK_THROWS_AS(x_even_moment_quadrature(0.5, 1), divergence_error);
}

TEST_CASE("char_function_N: exact values at N=1") {
  // s=0 is the Cauchy weight: phi(t) = exp(-t/2).
  // s=1 has weight (1+x^2)^{-2}: phi(t) = (1+t/2) exp(-t/2).
  for (double t : {0.3, 1.0, 3.0}) {
    const double k = t / 2.0;
    auto p0 = char_function_N(0.0, 1, t);
    CHECK(p0.real() == doctest::Approx(std::exp(-k)).epsilon(1e-10));
    CHECK(std::abs(p0.imag()) < 1e-10);
    auto p1 = char_function_N(1.0, 1, t);
    CHECK(p1.real() ==
          doctest::Approx((1.0 + k) * std::exp(-k)).epsilon(1e-10));
  }
  CHECK(char_function_N(1.0, 1, 0.0) == std::complex<double>(1.0, 0.0));
}

TEST_CASE("char_function_N: real, bounded by 1, any N") {
  for (int N : {1, 2, 3, 4}) {
    for (double t : {0.4, 1.7, 4.2}) {
      auto p = char_function_N(0.8, N, t);
      CHECK(std::abs(p.imag()) < 1e-10);
      CHECK(std::abs(p) <= 1.0 + 1e-10);
      CHECK(p.real() > 0.0);
    }
  }
}

TEST_CASE("char_function_N: curvature at 0 equals -(1/4) E_1[x^2] at N=1") {
  const double s = 2.0;
  const double h = 0.01;
  const double second =
      (char_function_N(s, 1, h).real() - 2.0 +
       char_function_N(s, 1, -h).real()) /
      (h * h);
  const double want = -0.25 * em::single_coord_even_moment(s, 1, 1);
  CHECK(second == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("char_function_N agrees with the tensor route") {
  // E_N[cos(kappa * sum)] computed two independent ways: tensor panels in
  // theta-space vs the Hankel determinant of 1-D Fourier moments
  const double s = 1.5;
  const int N = 2;
  const double t = 0.8;
  const double kappa = t / (2.0 * N);
  auto tensor =
      hp_expectation(s, N, [&](double u) { return std::cos(kappa * u); });
  auto det_route = char_function_N(s, N, t);
  CHECK(det_route.real() == doctest::Approx(tensor.value).epsilon(1e-9));
}

TEST_CASE("xi_N: boundary behavior at t=0") {
  auto xi = xi_N(1.0, 2, {0.0, -0.01, 0.01});
  CHECK(xi[0] == 0.0);
  // even characteristic function makes Xi even: numerical slope ~ 0
  CHECK(std::abs((xi[2] - xi[1]) / 0.02) < 1e-6);
}

TEST_CASE("xi_N: small-t quadratic coefficient") {
  // Xi_N(t) = -(t^2/4) E_N[(sum/N)^2] + O(t^4); at s=1, N=2 the bracket is
  // (8/3)/4 = 2/3
  auto xi = xi_N(1.0, 2, {0.05});
  const double want = -(0.05 * 0.05 / 4.0) * (2.0 / 3.0);
  CHECK(xi[0] == doctest::Approx(want).epsilon(1e-5));
}

TEST_CASE("xi_N: derivatives are consistent under step halving") {
  std::vector<double> grid = {0.3, 0.7};
  auto a = xi_N_derivatives(2.0, 2, grid, 24, 1e-3);
  auto b = xi_N_derivatives(2.0, 2, grid, 24, 5e-4);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(a.xi[i] == doctest::Approx(b.xi[i]).epsilon(1e-9).scale(1.0));
    CHECK(a.dxi[i] == doctest::Approx(b.dxi[i]).epsilon(1e-7).scale(1.0));
    CHECK(a.d2xi[i] == doctest::Approx(b.d2xi[i]).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("xi_N: vanishing characteristic function is reported") {
  // at s=1, N=1: phi(t) = (1+t/2)exp(-t/2) ~ 3.6e-10 at t=50
  CHECK_THROWS_AS(xi_N(1.0, 1, {50.0}), convergence_error);
}

}  // TEST_SUITE
