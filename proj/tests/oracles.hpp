#pragma once

// Test-only oracles, independent of the library's computation paths.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace oracles {

/// Midpoint Riemann-Stieltjes value of int_a^b (x(r) - x(a)) (x) dx(r) for a
/// callable path, at `steps` subdivisions. Used as the reference for
/// quadrature lifts of smooth paths.
inline std::vector<double> riemann_second_level(
    const std::function<void(double, std::span<double>)>& path, std::size_t dim, double a,
    double b, std::size_t steps) {
  std::vector<double> xx(dim * dim, 0.0), x0(dim), xl(dim), xr(dim), xm(dim);
  path(a, x0);
  const double h = (b - a) / static_cast<double>(steps);
  path(a, xl);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t0 = a + static_cast<double>(k) * h;
    path(t0 + h, xr);
    path(t0 + 0.5 * h, xm);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        xx[i * dim + j] += (xm[i] - x0[i]) * (xr[j] - xl[j]);
    std::swap(xl, xr);
  }
  return xx;
}

/// Classic RK4 for dy/dt = f(y), fixed step.
inline double rk4(const std::function<double(double)>& f, double y0, double t1,
                  std::size_t steps) {
  double y = y0;
  const double h = t1 / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace oracles
