#include "cuemom/power_series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cuemom {

double PowerSeries::eval(double t) const {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * t + c[k];
  return v;
}

PowerSeries ps_add(const PowerSeries& a, const PowerSeries& b) {
  PowerSeries r(std::min(a.size(), b.size()));
  for (std::size_t k = 0; k < r.size(); ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

PowerSeries ps_sub(const PowerSeries& a, const PowerSeries& b) {
  PowerSeries r(std::min(a.size(), b.size()));
  for (std::size_t k = 0; k < r.size(); ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

PowerSeries ps_scale(const PowerSeries& a, double k) {
  PowerSeries r = a;
  for (auto& v : r.c) v *= k;
  return r;
}

PowerSeries ps_mul(const PowerSeries& a, const PowerSeries& b) {
  PowerSeries r(std::min(a.size(), b.size()));
  const std::size_t K = r.size();
  for (std::size_t i = 0; i < K && i < a.size(); ++i) {
    if (a.c[i] == 0.0) continue;
    const std::size_t jmax = std::min(b.size(), K - i);
    for (std::size_t j = 0; j < jmax; ++j) r.c[i + j] += a.c[i] * b.c[j];
  }
  return r;
}

PowerSeries ps_exp(const PowerSeries& a) {
  if (!a.size()) return PowerSeries();
  if (a.c[0] != 0.0) throw std::invalid_argument("ps_exp: constant term must vanish");
  PowerSeries r(a.size());
  r.c[0] = 1.0;
  // from (e^a)' = a' e^a:  n r_n = sum_{k=1}^{n} k a_k r_{n-k}
  for (std::size_t n = 1; n < r.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= n; ++k) acc += static_cast<double>(k) * a.c[k] * r.c[n - k];
    r.c[n] = acc / static_cast<double>(n);
  }
  return r;
}

PowerSeries ps_derivative(const PowerSeries& a) {
  if (a.size() <= 1) return PowerSeries(1);
  PowerSeries r(a.size() - 1);
  for (std::size_t k = 1; k < a.size(); ++k) r.c[k - 1] = static_cast<double>(k) * a.c[k];
  return r;
}

PowerSeries ps_integrate_over_x(const PowerSeries& a) {
  if (a.size() && a.c[0] != 0.0)
    throw std::invalid_argument("ps_integrate_over_x: integrand a(x)/x needs a(0) = 0");
  PowerSeries r(a.size());
  for (std::size_t k = 1; k < a.size(); ++k) r.c[k] = a.c[k] / static_cast<double>(k);
  return r;
}

}  // namespace cuemom
