#include "cuemom/quadrature1d.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cuemom::quad {
namespace {

// Legendre value and derivative at x via the three-term recurrence.
void legendre_pair(int n, double x, double* p, double* dp) {
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  *p = p1;
  *dp = n * (x * p1 - p0) / (x * x - 1.0);
}

GaussRule compute_rule(int n) {
  GaussRule r;
  r.x.assign(n, 0.0);
  r.w.assign(n, 0.0);
  if (n == 1) {
    r.x[0] = 0.0;
    r.w[0] = 2.0;
    return r;
  }
  const int half = (n + 1) / 2;
  for (int k = 0; k < half; ++k) {
    double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double p = 0.0, dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      legendre_pair(n, x, &p, &dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre_pair(n, x, &p, &dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // k = 0 is the largest root; store ascending.
    r.x[n - 1 - k] = x;
    r.w[n - 1 - k] = w;
    r.x[k] = -x;
    r.w[k] = w;
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 512)
    throw std::invalid_argument("gauss_legendre: order must be in [1, 512]");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

Panels uniform_panels(double a, double b, int count) {
  if (count < 1) throw std::invalid_argument("uniform_panels: count < 1");
  Panels out;
  out.reserve(count);
  const double step = (b - a) / count;
  for (int i = 0; i < count; ++i)
    out.push_back({a + i * step, i + 1 == count ? b : a + (i + 1) * step});
  return out;
}

Panels graded_panels(double a, double b, bool toward_b, int levels) {
  if (levels < 1) throw std::invalid_argument("graded_panels: levels < 1");
  Panels out;
  out.reserve(levels);
  const double len = b - a;
  if (toward_b) {
    // breakpoints b - len*2^{-k}, k = 0..levels-1, then the endpoint itself
    double lo = a;
    for (int k = 1; k < levels; ++k) {
      const double hi = b - len * std::ldexp(1.0, -k);
      out.push_back({lo, hi});
      lo = hi;
    }
    out.push_back({lo, b});
  } else {
    double hi = b;
    for (int k = 1; k < levels; ++k) {
      const double lo = a + len * std::ldexp(1.0, -k);
      out.push_back({lo, hi});
      hi = lo;
    }
    out.push_back({a, hi});
    // keep ascending order
    for (std::size_t i = 0, j = out.size() - 1; i < j; ++i, --j)
      std::swap(out[i], out[j]);
  }
  return out;
}

Panels phase_limited(Panels in, double freq, double max_phase) {
  if (max_phase <= 0) throw std::invalid_argument("phase_limited: max_phase <= 0");
  const double f = std::abs(freq);
  if (f == 0.0) return in;
  Panels out;
  out.reserve(in.size());
  for (const Panel& p : in) {
    const double width = p.b - p.a;
    const int parts = std::max(1, (int)std::ceil(width * f / max_phase));
    if (parts == 1) {
      out.push_back(p);
    } else {
      const Panels sub = uniform_panels(p.a, p.b, parts);
      out.insert(out.end(), sub.begin(), sub.end());
    }
  }
  return out;
}

}  // namespace cuemom::quad
