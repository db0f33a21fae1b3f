#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rsde/common.hpp"
#include "rsde/rng.hpp"
#include "rsde/time_grid.hpp"

namespace rsde {

/// First- and second-level values over one interval pair (s, t).
struct LevelPair {
  std::vector<double> x;   // increment, length d
  std::vector<double> xx;  // iterated integral, d x d row-major
};

namespace detail {

inline void outer_add(std::span<double> xx, std::span<const double> a,
                      std::span<const double> b, std::size_t d) {
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) xx[i * d + j] += a[i] * b[j];
}

inline double frobenius(std::span<const double> m) {
  double s = 0.0;
  for (double v : m) s += v * v;
  return std::sqrt(s);
}

}  // namespace detail

/// Level-2 rough path on a grid: per-cell increments X_{t_k,t_{k+1}} and
/// iterated integrals XX_{t_k,t_{k+1}}. Values over non-adjacent grid pairs
/// are reconstructed through Chen's relation, which the cell storage makes
/// exact by construction. Immutable after construction.
class RoughPath {
 public:
  RoughPath(TimeGrid grid, std::size_t dim, double hoelder_exponent,
            std::vector<double> increments, std::vector<double> second_level)
      : grid_(std::move(grid)),
        dim_(dim),
        alpha_(hoelder_exponent),
        inc_(std::move(increments)),
        second_(std::move(second_level)) {
    require(dim_ >= 1, "RoughPath: dim must be positive");
    require(alpha_ > 1.0 / 3.0 && alpha_ <= 0.5,
            "RoughPath: Hoelder exponent must lie in (1/3, 1/2]");
    const std::size_t n = grid_.n_cells();
    require(inc_.size() == n * dim_, "RoughPath: increment array size mismatch");
    require(second_.size() == n * dim_ * dim_, "RoughPath: second-level array size mismatch");
    const std::size_t bad_inc = first_non_finite(inc_);
    if (bad_inc != static_cast<std::size_t>(-1))
      throw std::invalid_argument("RoughPath: non-finite increment at flat index " +
                                  std::to_string(bad_inc));
    const std::size_t bad_xx = first_non_finite(second_);
    if (bad_xx != static_cast<std::size_t>(-1))
      throw std::invalid_argument("RoughPath: non-finite second level at flat index " +
                                  std::to_string(bad_xx));
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  double alpha() const { return alpha_; }
  std::size_t n_cells() const { return grid_.n_cells(); }

  std::span<const double> inc(std::size_t cell) const {
    return {inc_.data() + cell * dim_, dim_};
  }
  std::span<const double> second(std::size_t cell) const {
    return {second_.data() + cell * dim_ * dim_, dim_ * dim_};
  }

  /// Largest cell-level magnitudes, used for relative tolerances.
  std::pair<double, double> max_levels() const {
    double mx = 0.0, mxx = 0.0;
    for (std::size_t k = 0; k < n_cells(); ++k) {
      mx = std::max(mx, norm2(inc(k)));
      mxx = std::max(mxx, detail::frobenius(second(k)));
    }
    return {mx, mxx};
  }

 private:
  TimeGrid grid_;
  std::size_t dim_;
  double alpha_;
  std::vector<double> inc_;
  std::vector<double> second_;
};

/// Chen extension of the stored cells to the grid pair (i, j), i < j.
/// Associative: any intermediate split point reproduces the same values up
/// to floating accumulation.
inline LevelPair chen_extend(const RoughPath& rp, std::size_t i, std::size_t j) {
  if (i >= j) throw std::invalid_argument("chen_extend: requires i < j");
  if (j > rp.n_cells()) throw std::invalid_argument("chen_extend: index beyond grid");
  const std::size_t d = rp.dim();
  LevelPair out;
  out.x.assign(d, 0.0);
  out.xx.assign(d * d, 0.0);
  for (std::size_t k = i; k < j; ++k) {
    const auto xk = rp.inc(k);
    const auto xxk = rp.second(k);
    for (std::size_t a = 0; a < d * d; ++a) out.xx[a] += xxk[a];
    detail::outer_add(out.xx, out.x, xk, d);  // X_{i,k} (x) X_{k,k+1}
    for (std::size_t a = 0; a < d; ++a) out.x[a] += xk[a];
  }
  return out;
}

/// Lift of the piecewise-linear interpolant of `samples` ((N+1) x d, flat,
/// point-major). Per cell the Riemann-Stieltjes iterated integral of a
/// linear segment is (1/2) X (x) X.
inline RoughPath lift_piecewise_linear(std::span<const double> samples,
                                       const TimeGrid& grid, std::size_t dim,
                                       double alpha = 0.4) {
  const std::size_t n = grid.n_cells();
  require(samples.size() == (n + 1) * dim, "lift_piecewise_linear: sample count mismatch");
  const std::size_t bad = first_non_finite(samples);
  if (bad != static_cast<std::size_t>(-1))
    throw std::invalid_argument("lift_piecewise_linear: non-finite sample at flat index " +
                                std::to_string(bad));
  std::vector<double> inc(n * dim), xx(n * dim * dim);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < dim; ++a)
      inc[k * dim + a] = samples[(k + 1) * dim + a] - samples[k * dim + a];
    double* cell = xx.data() + k * dim * dim;
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b)
        cell[a * dim + b] = 0.5 * inc[k * dim + a] * inc[k * dim + b];
  }
  return RoughPath(grid, dim, alpha, std::move(inc), std::move(xx));
}

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(std::size_t order, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  nodes.resize(order);
  weights.resize(order);
  const std::size_t m = (order + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double x = std::cos(3.14159265358979323846 * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(order) + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      pp = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[order - 1 - i] = weights[i];
  }
}

}  // namespace detail

/// Lift of a C^1 path given by (value, exact derivative) callables, with the
/// per-cell iterated integral computed by Gauss-Legendre quadrature of
/// int (x(r) - x(t_k)) (x) x'(r) dr.
///
/// Callables fill a d-vector at a time point.
inline RoughPath lift_smooth_quadrature(
    const std::function<void(double, std::span<double>)>& path_fn,
    const std::function<void(double, std::span<double>)>& derivative_fn,
    const TimeGrid& grid, std::size_t dim, std::size_t quad_order,
    double alpha = 0.4) {
  require(quad_order >= 2, "lift_smooth_quadrature: quad_order must be >= 2");
  std::vector<double> nodes, weights;
  detail::gauss_legendre(quad_order, nodes, weights);

  const std::size_t n = grid.n_cells();
  std::vector<double> inc(n * dim), xx(n * dim * dim, 0.0);
  std::vector<double> x_left(dim), x_right(dim), x_node(dim), dx_node(dim);

  auto eval = [&](const std::function<void(double, std::span<double>)>& f, double t,
                  std::span<double> out) {
    f(t, out);
    const std::size_t bad = first_non_finite(out);
    if (bad != static_cast<std::size_t>(-1))
      throw std::invalid_argument("lift_smooth_quadrature: non-finite evaluation at t=" +
                                  std::to_string(t));
  };

  eval(path_fn, grid[0], x_left);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = grid[k], t = grid[k + 1];
    eval(path_fn, t, x_right);
    for (std::size_t a = 0; a < dim; ++a) inc[k * dim + a] = x_right[a] - x_left[a];
    double* cell = xx.data() + k * dim * dim;
    const double half = 0.5 * (t - s);
    const double mid = 0.5 * (t + s);
    for (std::size_t q = 0; q < quad_order; ++q) {
      const double r = mid + half * nodes[q];
      const double w = half * weights[q];
      eval(path_fn, r, x_node);
      eval(derivative_fn, r, dx_node);
      for (std::size_t a = 0; a < dim; ++a) {
        const double da = x_node[a] - x_left[a];
        for (std::size_t b = 0; b < dim; ++b) cell[a * dim + b] += w * da * dx_node[b];
      }
    }
    std::swap(x_left, x_right);
  }
  return RoughPath(grid, dim, alpha, std::move(inc), std::move(xx));
}

enum class PairSet { all, dyadic };

struct SeminormReport {
  double level1 = 0.0;  // sup |X_{s,t}| / |t-s|^alpha
  double level2 = 0.0;  // sup |XX_{s,t}| / |t-s|^(2 alpha)
  PairSet pairs = PairSet::all;
  double value() const { return level1 + level2; }
};

namespace detail {

template <class Visit>
inline void sweep_pairs_from(const RoughPath& rp, std::size_t i, std::size_t j_stride_pow2,
                             Visit&& visit) {
  const std::size_t d = rp.dim();
  std::vector<double> x(d, 0.0), xx(d * d, 0.0);
  std::size_t next_dyadic = i + 1;
  for (std::size_t j = i + 1; j <= rp.n_cells(); ++j) {
    const auto xk = rp.inc(j - 1);
    const auto xxk = rp.second(j - 1);
    for (std::size_t a = 0; a < d * d; ++a) xx[a] += xxk[a];
    outer_add(xx, x, xk, d);
    for (std::size_t a = 0; a < d; ++a) x[a] += xk[a];
    if (j_stride_pow2 == 0) {
      visit(j, std::span<const double>(x), std::span<const double>(xx));
    } else if (j == next_dyadic) {
      visit(j, std::span<const double>(x), std::span<const double>(xx));
      next_dyadic = i + 2 * (j - i);
    }
  }
}

}  // namespace detail

/// Two-level Hoelder seminorm over a grid-pair family. "all" is the O(N^2)
/// reference; "dyadic" restricts to spans j - i that are powers of two
/// (cheaper, a lower bound on "all").
inline SeminormReport rough_seminorm(const RoughPath& rp, PairSet pairs = PairSet::all) {
  SeminormReport rep;
  rep.pairs = pairs;
  for (std::size_t i = 0; i < rp.n_cells(); ++i) {
    detail::sweep_pairs_from(
        rp, i, pairs == PairSet::dyadic ? 1 : 0,
        [&](std::size_t j, std::span<const double> x, std::span<const double> xx) {
          const double span_t = rp.grid()[j] - rp.grid()[i];
          rep.level1 = std::max(rep.level1, norm2(x) / std::pow(span_t, rp.alpha()));
          rep.level2 = std::max(rep.level2,
                                detail::frobenius(xx) / std::pow(span_t, 2.0 * rp.alpha()));
        });
  }
  return rep;
}

/// Grid surrogate of the rough metric: the two-level Hoelder seminorm of the
/// pairwise difference (X_a - X_b, XX_a - XX_b), where each path's values
/// over a pair come from its own Chen extension. (Extending cellwise
/// differences would be wrong: the quadratic cross terms do not subtract.)
inline SeminormReport rough_distance_report(const RoughPath& a, const RoughPath& b,
                                            PairSet pairs = PairSet::all) {
  if (!a.grid().same_as(b.grid()))
    throw grid_mismatch_error("rough_distance: grids differ (no implicit resampling)");
  if (a.dim() != b.dim()) throw grid_mismatch_error("rough_distance: dims differ");
  if (a.alpha() != b.alpha())
    throw grid_mismatch_error("rough_distance: Hoelder exponents differ");
  const std::size_t n = a.n_cells(), d = a.dim();
  SeminormReport rep;
  rep.pairs = pairs;
  std::vector<double> xa(d), xb(d), xxa(d * d), xxb(d * d), dx(d), dxx(d * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(xa.begin(), xa.end(), 0.0);
    std::fill(xb.begin(), xb.end(), 0.0);
    std::fill(xxa.begin(), xxa.end(), 0.0);
    std::fill(xxb.begin(), xxb.end(), 0.0);
    std::size_t next_dyadic = i + 1;
    for (std::size_t j = i + 1; j <= n; ++j) {
      const auto ia = a.inc(j - 1), ib = b.inc(j - 1);
      const auto sa = a.second(j - 1), sb = b.second(j - 1);
      for (std::size_t q = 0; q < d * d; ++q) {
        xxa[q] += sa[q];
        xxb[q] += sb[q];
      }
      detail::outer_add(xxa, xa, ia, d);
      detail::outer_add(xxb, xb, ib, d);
      for (std::size_t q = 0; q < d; ++q) {
        xa[q] += ia[q];
        xb[q] += ib[q];
      }
      const bool visit = pairs == PairSet::all || j == next_dyadic;
      if (visit) {
        if (pairs == PairSet::dyadic) next_dyadic = i + 2 * (j - i);
        for (std::size_t q = 0; q < d; ++q) dx[q] = xa[q] - xb[q];
        for (std::size_t q = 0; q < d * d; ++q) dxx[q] = xxa[q] - xxb[q];
        const double span_t = a.grid()[j] - a.grid()[i];
        rep.level1 = std::max(rep.level1, norm2(dx) / std::pow(span_t, a.alpha()));
        rep.level2 = std::max(
            rep.level2, detail::frobenius(dxx) / std::pow(span_t, 2.0 * a.alpha()));
      }
    }
  }
  return rep;
}

inline double rough_distance(const RoughPath& a, const RoughPath& b,
                             PairSet pairs = PairSet::all) {
  return rough_distance_report(a, b, pairs).value();
}

/// Chen-relation residual |XX_{i,j} - XX_{i,u} - XX_{u,j} - X_{i,u} (x) X_{u,j}|
/// of one (full, left, right) triple of pair values (Frobenius norm).
inline double chen_triple_residual(const LevelPair& full, const LevelPair& left,
                                   const LevelPair& right) {
  const std::size_t d = full.x.size();
  std::vector<double> res(d * d);
  for (std::size_t a = 0; a < d * d; ++a) res[a] = full.xx[a] - left.xx[a] - right.xx[a];
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) res[a * d + b] -= left.x[a] * right.x[b];
  return detail::frobenius(res);
}

/// Max Chen residual over sampled (i, u, j) triples. For a path with
/// cell-level storage this measures floating accumulation only; supplying
/// corrupted pair values to chen_triple_residual is what trips it.
inline double check_chen(const RoughPath& rp, std::size_t n_triples = 1000,
                         std::uint64_t seed = 0x9c7e3a11u) {
  const std::size_t n = rp.n_cells();
  if (n < 2) return 0.0;
  GaussianRng rng(derive_seed(seed, n));
  double worst = 0.0;
  for (std::size_t s = 0; s < n_triples; ++s) {
    std::size_t i = rng.raw() % (n - 1);
    std::size_t j = i + 2 + rng.raw() % (n - i - 1);
    if (j > n) j = n;
    const std::size_t u = i + 1 + rng.raw() % (j - i - 1);
    worst = std::max(worst, chen_triple_residual(chen_extend(rp, i, j), chen_extend(rp, i, u),
                                                 chen_extend(rp, u, j)));
  }
  return worst;
}

/// Max weak-geometric symmetry residual |(XX + XX^T)/2 - (X (x) X)/2| over all
/// cells plus sampled extended pairs.
inline double check_geometric(const RoughPath& rp, std::size_t n_extended = 256,
                              std::uint64_t seed = 0x51c0ffeeu) {
  const std::size_t n = rp.n_cells(), d = rp.dim();
  std::vector<double> res(d * d);
  auto residual = [&](std::span<const double> x, std::span<const double> xx) {
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        res[a * d + b] = 0.5 * (xx[a * d + b] + xx[b * d + a]) - 0.5 * x[a] * x[b];
    return detail::frobenius(res);
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, residual(rp.inc(k), rp.second(k)));
  if (n >= 2) {
    GaussianRng rng(derive_seed(seed, n));
    for (std::size_t s = 0; s < n_extended; ++s) {
      const std::size_t i = rng.raw() % (n - 1);
      const std::size_t j = i + 2 + rng.raw() % (n - i - 1);
      const auto p = chen_extend(rp, i, std::min<std::size_t>(j, n));
      worst = std::max(worst, residual(p.x, p.xx));
    }
  }
  return worst;
}

/// Shift the second level by +(1/2) dt I per cell (Ito lift -> Stratonovich).
/// Chen extension then carries +(1/2)(t-s) I to every pair.
inline RoughPath ito_to_stratonovich(const RoughPath& rp) {
  const std::size_t n = rp.n_cells(), d = rp.dim();
  std::vector<double> inc(rp.inc(0).data(), rp.inc(0).data() + n * d);
  std::vector<double> xx(rp.second(0).data(), rp.second(0).data() + n * d * d);
  for (std::size_t k = 0; k < n; ++k) {
    const double half_dt = 0.5 * rp.grid().dt(k);
    for (std::size_t a = 0; a < d; ++a) xx[k * d * d + a * d + a] += half_dt;
  }
  return RoughPath(rp.grid(), d, rp.alpha(), std::move(inc), std::move(xx));
}

/// Inverse of ito_to_stratonovich; the round trip is exact.
inline RoughPath stratonovich_to_ito(const RoughPath& rp) {
  const std::size_t n = rp.n_cells(), d = rp.dim();
  std::vector<double> inc(rp.inc(0).data(), rp.inc(0).data() + n * d);
  std::vector<double> xx(rp.second(0).data(), rp.second(0).data() + n * d * d);
  for (std::size_t k = 0; k < n; ++k) {
    const double half_dt = 0.5 * rp.grid().dt(k);
    for (std::size_t a = 0; a < d; ++a) xx[k * d * d + a * d + a] -= half_dt;
  }
  return RoughPath(rp.grid(), d, rp.alpha(), std::move(inc), std::move(xx));
}

/// Re-express the path on the subgrid picked out by point indices
/// (0 = first point, n_cells() = last). Cells of the coarse grid are
/// Chen compositions of the fine cells, so no information is invented.
inline RoughPath restrict_to(const RoughPath& rp, std::span<const std::size_t> point_indices) {
  require(point_indices.size() >= 2, "restrict_to: need at least two points");
  require(point_indices.front() == 0 && point_indices.back() == rp.n_cells(),
          "restrict_to: subgrid must span the full interval");
  const std::size_t d = rp.dim();
  const std::size_t n = point_indices.size() - 1;
  std::vector<double> pts(n + 1), inc(n * d), xx(n * d * d);
  for (std::size_t i = 0; i <= n; ++i) {
    require(i == 0 || point_indices[i] > point_indices[i - 1],
            "restrict_to: indices must increase");
    pts[i] = rp.grid()[point_indices[i]];
  }
  for (std::size_t k = 0; k < n; ++k) {
    const auto p = chen_extend(rp, point_indices[k], point_indices[k + 1]);
    std::copy(p.x.begin(), p.x.end(), inc.begin() + k * d);
    std::copy(p.xx.begin(), p.xx.end(), xx.begin() + k * d * d);
  }
  return RoughPath(TimeGrid(std::move(pts)), d, rp.alpha(), std::move(inc), std::move(xx));
}

/// Uniform coarsening: keep every `stride`-th point.
inline RoughPath restrict_stride(const RoughPath& rp, std::size_t stride) {
  require(stride >= 1 && rp.n_cells() % stride == 0,
          "restrict_stride: stride must divide the cell count");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i <= rp.n_cells(); i += stride) idx.push_back(i);
  return restrict_to(rp, idx);
}

}  // namespace rsde
