#pragma once

// Small self-contained numerical helpers for test oracles. Everything here
// is intentionally independent of the library implementation it checks.

#include <cmath>
#include <functional>
#include <random>

namespace testutil {

// adaptive Simpson on [a,b]
inline double simpson_step(const std::function<double(double)>& f, double a,
                           double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

// integral over the whole real line via x = tan(theta)
inline double integrate_real_line(const std::function<double(double)>& f,
                                  double tol = 1e-12) {
  auto g = [&](double th) {
    double c = std::cos(th);
    double x = std::tan(th);
    return f(x) / (c * c);
  };
  const double h = M_PI / 2.0 - 1e-9;
  return integrate(g, -h, h, tol);
}

inline std::mt19937_64 test_rng(std::uint64_t seed = 0xc0ffee123456789ULL) {
  return std::mt19937_64(seed);
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(g() >> 11) * 0x1.0p-53);
}

}  // namespace testutil
