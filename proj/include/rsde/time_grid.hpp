#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rsde/common.hpp"

namespace rsde {

/// Strictly increasing time points t_0 < ... < t_N; cells are [t_k, t_{k+1}).
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2)
      throw std::invalid_argument("TimeGrid needs at least one cell");
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      if (!std::isfinite(points_[i]) || !(points_[i] < points_[i + 1]))
        throw std::invalid_argument("TimeGrid points must be finite and strictly increasing");
    }
    require_finite(points_.back(), "TimeGrid end point");
  }

  static TimeGrid uniform(double t0, double t1, std::size_t n_cells) {
    if (n_cells == 0) throw std::invalid_argument("TimeGrid: n_cells must be >= 1");
    if (!(t1 > t0)) throw std::invalid_argument("TimeGrid: t1 must exceed t0");
    std::vector<double> p(n_cells + 1);
    for (std::size_t i = 0; i <= n_cells; ++i) {
      const double w = static_cast<double>(i) / static_cast<double>(n_cells);
      p[i] = t0 + w * (t1 - t0);
    }
    p.back() = t1;
    return TimeGrid(std::move(p));
  }

  std::size_t n_cells() const { return points_.size() - 1; }
  std::size_t n_points() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  double dt(std::size_t cell) const { return points_[cell + 1] - points_[cell]; }
  const std::vector<double>& points() const { return points_; }

  double mesh() const {
    double m = 0.0;
    for (std::size_t k = 0; k < n_cells(); ++k) m = std::max(m, dt(k));
    return m;
  }

  bool same_as(const TimeGrid& o) const { return points_ == o.points_; }

  /// Every cell length equal to within a relative tolerance.
  bool is_uniform(double rtol = 1e-9) const {
    const double h = dt(0);
    for (std::size_t k = 1; k < n_cells(); ++k)
      if (std::abs(dt(k) - h) > rtol * h) return false;
    return true;
  }

 private:
  std::vector<double> points_;
};

}  // namespace rsde
