#pragma once

#include <vector>

namespace cuemom {

// Dense truncated power series sum_k c[k] t^k. All binary operations
// truncate to the shorter length unless stated otherwise.
struct PowerSeries {
  std::vector<double> c;

  PowerSeries() = default;
  explicit PowerSeries(std::size_t order_plus_one) : c(order_plus_one, 0.0) {}

  std::size_t size() const { return c.size(); }
  double operator[](std::size_t k) const { return k < c.size() ? c[k] : 0.0; }

  double eval(double t) const;  // Horner
};

PowerSeries ps_add(const PowerSeries& a, const PowerSeries& b);
PowerSeries ps_sub(const PowerSeries& a, const PowerSeries& b);
PowerSeries ps_scale(const PowerSeries& a, double k);
PowerSeries ps_mul(const PowerSeries& a, const PowerSeries& b);

// exp of a series with zero constant term
PowerSeries ps_exp(const PowerSeries& a);

// termwise derivative, one order shorter
PowerSeries ps_derivative(const PowerSeries& a);

// int_0^t a(x)/x dx for a with a[0] = 0: coefficient k maps to a[k]/k
PowerSeries ps_integrate_over_x(const PowerSeries& a);

}  // namespace cuemom
