#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rsde/common.hpp"
#include "rsde/rough_path.hpp"
#include "rsde/time_grid.hpp"

namespace rsde {

/// Path controlled by a d-dimensional driver: values y(t_k) in R^m together
/// with the Gubinelli derivative y'(t_k) in R^(m x d) of the first-order
/// expansion y(t) - y(s) = y'(s) X_{s,t} + R_Y(s,t).
class ControlledPath {
 public:
  ControlledPath(TimeGrid grid, std::size_t state_dim, std::size_t driver_dim,
                 std::vector<double> values, std::vector<double> gubinelli)
      : grid_(std::move(grid)),
        m_(state_dim),
        d_(driver_dim),
        values_(std::move(values)),
        gubinelli_(std::move(gubinelli)) {
    require(m_ >= 1 && d_ >= 1, "ControlledPath: dims must be positive");
    require(values_.size() == grid_.n_points() * m_, "ControlledPath: value array mismatch");
    require(gubinelli_.size() == grid_.n_points() * m_ * d_,
            "ControlledPath: derivative array mismatch");
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t state_dim() const { return m_; }
  std::size_t driver_dim() const { return d_; }

  std::span<const double> value(std::size_t point) const {
    return {values_.data() + point * m_, m_};
  }
  /// Row-major m x d block at a grid point.
  std::span<const double> derivative(std::size_t point) const {
    return {gubinelli_.data() + point * m_ * d_, m_ * d_};
  }

 private:
  TimeGrid grid_;
  std::size_t m_, d_;
  std::vector<double> values_;
  std::vector<double> gubinelli_;
};

/// Compensated Riemann sum  sum_k  y(t_k) (x) X_k + y'(t_k) XX_k, the grid
/// surrogate of the rough integral. Result is m x d row-major; for a scalar
/// driver this is the usual m-vector  sum y X + y' XX.
inline std::vector<double> rough_integral(const ControlledPath& cp, const RoughPath& drv) {
  if (!cp.grid().same_as(drv.grid()))
    throw grid_mismatch_error("rough_integral: controlled path and driver grids differ");
  if (cp.driver_dim() != drv.dim())
    throw grid_mismatch_error("rough_integral: driver dimension mismatch");
  const std::size_t m = cp.state_dim(), d = drv.dim();
  std::vector<double> out(m * d, 0.0);
  for (std::size_t k = 0; k < drv.n_cells(); ++k) {
    const auto y = cp.value(k);
    const auto yp = cp.derivative(k);
    const auto x = drv.inc(k);
    const auto xx = drv.second(k);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double acc = y[i] * x[j];
        for (std::size_t l = 0; l < d; ++l) acc += yp[i * d + l] * xx[l * d + j];
        out[i * d + j] += acc;
      }
    }
  }
  return out;
}

/// 2 alpha-Hoelder seminorm of the remainder R_Y(s,t) = y(t) - y(s) - y'(s) X_{s,t}
/// over all grid pairs.
inline double remainder_seminorm(const ControlledPath& cp, const RoughPath& drv) {
  if (!cp.grid().same_as(drv.grid()))
    throw grid_mismatch_error("remainder_seminorm: grids differ");
  const std::size_t m = cp.state_dim(), d = drv.dim();
  const std::size_t n = drv.n_cells();
  double worst = 0.0;
  std::vector<double> x(d), r(m);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(x.begin(), x.end(), 0.0);
    const auto yi = cp.value(i);
    const auto ypi = cp.derivative(i);
    for (std::size_t j = i + 1; j <= n; ++j) {
      const auto xk = drv.inc(j - 1);
      for (std::size_t a = 0; a < d; ++a) x[a] += xk[a];
      const auto yj = cp.value(j);
      for (std::size_t a = 0; a < m; ++a) {
        double lin = 0.0;
        for (std::size_t b = 0; b < d; ++b) lin += ypi[a * d + b] * x[b];
        r[a] = yj[a] - yi[a] - lin;
      }
      const double span_t = drv.grid()[j] - drv.grid()[i];
      worst = std::max(worst, norm2(r) / std::pow(span_t, 2.0 * drv.alpha()));
    }
  }
  return worst;
}

/// Sup-norm distance over shared grid points, the metric of the continuity
/// theorem for RDE solutions.
inline double strong_error(const ControlledPath& reference, const ControlledPath& test) {
  if (!reference.grid().same_as(test.grid()))
    throw grid_mismatch_error("strong_error: grids differ");
  if (reference.state_dim() != test.state_dim())
    throw grid_mismatch_error("strong_error: state dims differ");
  const std::size_t m = reference.state_dim();
  double worst = 0.0;
  for (std::size_t p = 0; p < reference.grid().n_points(); ++p) {
    const auto a = reference.value(p);
    const auto b = test.value(p);
    for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

}  // namespace rsde
