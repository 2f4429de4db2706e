#pragma once
// Shared 1-D Gauss-Legendre rules and panel partitions.  Integration here is
// deliberately non-adaptive: callers fix a panel set and an order, then
// estimate error by re-running at a doubled order.  That keeps node layouts
// deterministic, which the tensor-product and Fourier-moment modules rely on.

#include <cstddef>
#include <vector>

namespace cuemom::quad {

// Nodes and weights on [-1, 1], ascending nodes.
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Cached per order, thread-safe.  Valid orders: 1..512.
const GaussRule& gauss_legendre(int n);

struct Panel {
  double a;
  double b;
};
using Panels = std::vector<Panel>;

Panels uniform_panels(double a, double b, int count);

// `levels` panels on [a, b] with widths halving toward b (toward a when
// toward_b is false).  The panel adjacent to the refined endpoint has width
// (b-a)*2^(1-levels), which is what resolves endpoint power singularities:
// a node never lands on the endpoint itself.
Panels graded_panels(double a, double b, bool toward_b, int levels);

// Splits any panel wider than max_phase/|freq| so that an oscillation
// e^{i*freq*x} advances at most max_phase radians per panel.  freq == 0 is a
// no-op.
Panels phase_limited(Panels in, double freq, double max_phase);

template <class F>
auto panel_integral(F&& f, const Panel& p, const GaussRule& r)
    -> decltype(f(0.0)) {
  const double mid = 0.5 * (p.a + p.b);
  const double half = 0.5 * (p.b - p.a);
  decltype(f(0.0)) acc{};
  for (std::size_t i = 0; i < r.x.size(); ++i)
    acc += r.w[i] * f(mid + half * r.x[i]);
  return half * acc;
}

template <class F>
auto integrate(F&& f, const Panels& ps, int order) -> decltype(f(0.0)) {
  const GaussRule& r = gauss_legendre(order);
  decltype(f(0.0)) acc{};
  for (const Panel& p : ps) acc += panel_integral(f, p, r);
  return acc;
}

}  // namespace cuemom::quad
