#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsde/common.hpp"
#include "rsde/fft.hpp"
#include "rsde/rng.hpp"
#include "rsde/rough_path.hpp"
#include "rsde/time_grid.hpp"

namespace rsde::noise {

// Substream tags; every sampler is a pure function of (seed, tags).
inline constexpr std::uint64_t kTagPath = 0x50415448;
inline constexpr std::uint64_t kTagBrownian = 0x42524f57;
inline constexpr std::uint64_t kTagPadLeft = 0x4c504144;
inline constexpr std::uint64_t kTagPadRight = 0x52504144;
inline constexpr std::uint64_t kTagFbm = 0x46424d48;

enum class Family {
  brownian_ito,
  brownian_strat,
  wong_zakai,
  karhunen_loeve,
  mollified,
  fbm
};

inline std::string family_name(Family f) {
  switch (f) {
    case Family::brownian_ito: return "brownian_ito";
    case Family::brownian_strat: return "brownian_strat";
    case Family::wong_zakai: return "wong_zakai";
    case Family::karhunen_loeve: return "karhunen_loeve";
    case Family::mollified: return "mollified";
    case Family::fbm: return "fbm";
  }
  return "?";
}

inline Family family_from_name(const std::string& s) {
  for (Family f : {Family::brownian_ito, Family::brownian_strat, Family::wong_zakai,
                   Family::karhunen_loeve, Family::mollified, Family::fbm})
    if (family_name(f) == s) return f;
  throw std::invalid_argument("unknown noise family: " + s);
}

struct NoiseSpec {
  Family family = Family::brownian_strat;
  std::size_t dim = 1;
  std::uint64_t seed = 1;
  std::size_t fine_factor = 1;  // m >= 1, refinement for the underlying sample
  double level = 0.0;  // n (wong_zakai: per unit time; karhunen_loeve: terms),
                       // bandwidth (mollified) or Hurst H (fbm)
  double alpha = 0.4;  // Hoelder exponent of produced lifts

  void validate() const {
    require(dim >= 1, "NoiseSpec: dim must be positive");
    require(fine_factor >= 1, "NoiseSpec: fine_factor must be >= 1");
    switch (family) {
      case Family::wong_zakai:
      case Family::karhunen_loeve:
        require(level >= 1.0, "NoiseSpec: level n must be >= 1");
        break;
      case Family::mollified:
        require(level > 0.0, "NoiseSpec: bandwidth must be positive");
        break;
      case Family::fbm:
        require(level > 1.0 / 3.0 && level < 1.0, "NoiseSpec: Hurst H must lie in (1/3, 1)");
        break;
      default: break;
    }
  }
};

// ---------------------------------------------------------------------------
// Brownian sampling
// ---------------------------------------------------------------------------

/// The shared underlying draw: one Brownian sample on an m-times refined grid.
/// Every approximation family built from the same (seed, fine_factor) sees the
/// identical values, which realizes the coupled-sampling contract.
struct FineBrownian {
  TimeGrid coarse;
  TimeGrid fine;
  std::size_t dim = 1;
  std::size_t factor = 1;
  std::vector<double> values;  // fine point-major, W(t_0) = 0

  std::span<const double> at(std::size_t fine_point) const {
    return {values.data() + fine_point * dim, dim};
  }
  /// Value at a coarse grid point.
  std::span<const double> at_coarse(std::size_t coarse_point) const {
    return at(coarse_point * factor);
  }
};

inline TimeGrid refine_grid(const TimeGrid& coarse, std::size_t factor) {
  if (factor == 1) return coarse;
  std::vector<double> pts;
  pts.reserve(coarse.n_cells() * factor + 1);
  for (std::size_t k = 0; k < coarse.n_cells(); ++k) {
    const double s = coarse[k], h = coarse.dt(k) / static_cast<double>(factor);
    for (std::size_t j = 0; j < factor; ++j) pts.push_back(s + static_cast<double>(j) * h);
  }
  pts.push_back(coarse.back());
  return TimeGrid(std::move(pts));
}

inline FineBrownian sample_fine_brownian(const TimeGrid& coarse, std::size_t d,
                                         std::uint64_t seed, std::size_t factor = 1) {
  require(d >= 1, "sample_fine_brownian: dim must be positive");
  require(factor >= 1, "sample_fine_brownian: fine_factor must be >= 1");
  FineBrownian fb{coarse, refine_grid(coarse, factor), d, factor, {}};
  const std::size_t np = fb.fine.n_points();
  fb.values.assign(np * d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    GaussianRng g(derive_seed(seed, kTagBrownian, c));
    double w = 0.0;
    for (std::size_t k = 0; k + 1 < np; ++k) {
      w += std::sqrt(fb.fine.dt(k)) * g.normal();
      fb.values[(k + 1) * d + c] = w;
    }
  }
  return fb;
}

/// Brownian values on the grid points (point-major, W(t_0) = 0),
/// deterministic in the seed.
inline std::vector<double> sample_brownian(const TimeGrid& grid, std::size_t d,
                                           std::uint64_t seed) {
  return sample_fine_brownian(grid, d, seed, 1).values;
}

enum class Interpretation { ito, stratonovich };

/// Rough-path lift of the underlying Brownian sample on its coarse grid.
/// The Stratonovich second level is the piecewise-linear lift of the refined
/// sample composed to coarse cells; the Ito level subtracts (1/2) dt I.
/// In one dimension this reduces to the exact cell values
/// XX_Strat = X^2/2 and XX_Ito = (X^2 - dt)/2.
inline RoughPath brownian_lift(const FineBrownian& fine, Interpretation interp,
                               double alpha = 0.4) {
  RoughPath lifted = lift_piecewise_linear(fine.values, fine.fine, fine.dim, alpha);
  RoughPath strat = fine.factor == 1 ? std::move(lifted) : restrict_stride(lifted, fine.factor);
  if (interp == Interpretation::stratonovich) return strat;
  return stratonovich_to_ito(strat);
}

// ---------------------------------------------------------------------------
// Wong-Zakai
// ---------------------------------------------------------------------------

/// Piecewise-linear interpolation of the underlying Brownian on a coarse mesh
/// of `segments` equal pieces, agreeing with the Brownian at the breakpoints,
/// lifted canonically. The breakpoints must be points of the fine sample.
inline RoughPath wong_zakai_lift(const FineBrownian& fine, std::size_t segments,
                                 double alpha = 0.4) {
  require(segments >= 1, "wong_zakai_lift: need at least one segment");
  const std::size_t nf = fine.fine.n_cells();
  require(nf % segments == 0,
          "wong_zakai_lift: segment breakpoints must align with the fine sample grid");
  const std::size_t stride = nf / segments;
  const std::size_t d = fine.dim;
  std::vector<double> interp(fine.values.size());
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t p0 = s * stride, p1 = (s + 1) * stride;
    const double t0 = fine.fine[p0], t1 = fine.fine[p1];
    const auto w0 = fine.at(p0);
    const auto w1 = fine.at(p1);
    for (std::size_t p = p0; p < p1; ++p) {
      const double w = (fine.fine[p] - t0) / (t1 - t0);
      for (std::size_t c = 0; c < d; ++c)
        interp[p * d + c] = (1.0 - w) * w0[c] + w * w1[c];
    }
  }
  // exact agreement with the Brownian at breakpoints, including the end
  for (std::size_t s = 0; s <= segments; ++s) {
    const std::size_t p = s * stride;
    const auto w = fine.at(p);
    for (std::size_t c = 0; c < d; ++c) interp[p * d + c] = w[c];
  }
  RoughPath pl = lift_piecewise_linear(interp, fine.fine, d, alpha);
  return fine.factor == 1 ? pl : restrict_stride(pl, fine.factor);
}

// ---------------------------------------------------------------------------
// Karhunen-Loeve
// ---------------------------------------------------------------------------

/// Truncated sine expansion of Brownian motion on [0, T]:
///   W_c(t) = sqrt(2 T) sum_{k<=n} sin((k - 1/2) pi t / T) / ((k - 1/2) pi) Z_k^c
/// with the exact derivative sqrt(2 / T) sum_{k<=n} cos((k - 1/2) pi t / T) Z_k^c.
/// Horizons other than the unit interval use Brownian scaling W(Tt) = sqrt(T) W~(t).
class KarhunenLoevePath {
 public:
  static KarhunenLoevePath from_coefficients(double horizon, std::size_t dim,
                                             std::vector<double> z) {
    require(horizon > 0.0, "KarhunenLoevePath: horizon must be positive");
    require(dim >= 1 && z.size() % dim == 0, "KarhunenLoevePath: coefficient shape");
    KarhunenLoevePath p;
    p.horizon_ = horizon;
    p.dim_ = dim;
    p.n_terms_ = z.size() / dim;
    p.z_ = std::move(z);
    return p;
  }

  /// Coefficients recovered from the underlying Brownian draw by projecting
  /// its increments on the cosine basis (midpoint rule on the fine sample):
  ///   Z_k = sqrt(2/T) int_0^T cos((k - 1/2) pi s / T) dW(s).
  /// This couples the expansion to the same draw the other families see.
  static KarhunenLoevePath project(const FineBrownian& fine, std::size_t n_terms) {
    require(n_terms >= 1, "KarhunenLoevePath: need n >= 1 terms");
    require(std::abs(fine.fine.front()) < 1e-14,
            "KarhunenLoevePath: basis requires the grid to start at 0");
    require(fine.fine.n_cells() >= 4 * n_terms,
            "KarhunenLoevePath: fine sample too coarse to project " +
                std::to_string(n_terms) + " terms");
    const double T = fine.fine.back();
    const std::size_t d = fine.dim, nf = fine.fine.n_cells();
    std::vector<double> z(d * n_terms, 0.0);
    const double pref = std::sqrt(2.0 / T);
    for (std::size_t j = 0; j < nf; ++j) {
      const double tm = 0.5 * (fine.fine[j] + fine.fine[j + 1]);
      const auto w0 = fine.at(j);
      const auto w1 = fine.at(j + 1);
      for (std::size_t k = 0; k < n_terms; ++k) {
        const double freq = (static_cast<double>(k) + 0.5) * std::numbers::pi / T;
        const double basis = pref * std::cos(freq * tm);
        for (std::size_t c = 0; c < d; ++c)
          z[c * n_terms + k] += basis * (w1[c] - w0[c]);
      }
    }
    KarhunenLoevePath p;
    p.horizon_ = T;
    p.dim_ = d;
    p.n_terms_ = n_terms;
    p.z_ = std::move(z);
    return p;
  }

  double horizon() const { return horizon_; }
  std::size_t n_terms() const { return n_terms_; }
  std::size_t dim() const { return dim_; }

  void value(double t, std::span<double> out) const {
    check_domain(t);
    for (std::size_t c = 0; c < dim_; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_terms_; ++k) {
        const double kk = static_cast<double>(k) + 0.5;
        acc += std::sin(kk * std::numbers::pi * t / horizon_) / (kk * std::numbers::pi) *
               z_[c * n_terms_ + k];
      }
      out[c] = std::sqrt(2.0 * horizon_) * acc;
    }
  }

  void derivative(double t, std::span<double> out) const {
    check_domain(t);
    for (std::size_t c = 0; c < dim_; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_terms_; ++k) {
        const double kk = static_cast<double>(k) + 0.5;
        acc += std::cos(kk * std::numbers::pi * t / horizon_) * z_[c * n_terms_ + k];
      }
      out[c] = std::sqrt(2.0 / horizon_) * acc;
    }
  }

 private:
  void check_domain(double t) const {
    if (t < -1e-12 || t > horizon_ * (1.0 + 1e-12))
      throw std::invalid_argument("KarhunenLoevePath: t outside the basis horizon [0, T]");
  }

  double horizon_ = 1.0;
  std::size_t dim_ = 1, n_terms_ = 0;
  std::vector<double> z_;
};

/// Sampled values and exact derivatives of the coupled KL path on a grid.
inline std::pair<std::vector<double>, std::vector<double>> karhunen_loeve_path(
    std::size_t n_terms, const TimeGrid& grid, std::size_t d, std::uint64_t seed,
    std::size_t fine_cells = 4096) {
  require(std::abs(grid.front()) < 1e-14, "karhunen_loeve_path: grid must start at 0");
  const TimeGrid fine_base = TimeGrid::uniform(0.0, grid.back(), fine_cells);
  const FineBrownian fine = sample_fine_brownian(fine_base, d, seed, 1);
  const KarhunenLoevePath kl = KarhunenLoevePath::project(fine, n_terms);
  std::vector<double> vals(grid.n_points() * d), derivs(grid.n_points() * d);
  for (std::size_t p = 0; p < grid.n_points(); ++p) {
    kl.value(grid[p], std::span<double>(vals.data() + p * d, d));
    kl.derivative(grid[p], std::span<double>(derivs.data() + p * d, d));
  }
  return {std::move(vals), std::move(derivs)};
}

inline RoughPath karhunen_loeve_lift(const FineBrownian& fine, std::size_t n_terms,
                                     const TimeGrid& out_grid, std::size_t quad_order = 4,
                                     double alpha = 0.4) {
  const KarhunenLoevePath kl = KarhunenLoevePath::project(fine, n_terms);
  return lift_smooth_quadrature([&kl](double t, std::span<double> o) { kl.value(t, o); },
                                [&kl](double t, std::span<double> o) { kl.derivative(t, o); },
                                out_grid, fine.dim, quad_order, alpha);
}

// ---------------------------------------------------------------------------
// Mollified Brownian motion
// ---------------------------------------------------------------------------

/// Standard bump, compact support on (-1, 1), unit mass.
inline double mollifier(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  static const double inv_mass = [] {
    // int_{-1}^{1} exp(-1/(1-u^2)) du by composite Gauss-Legendre
    std::vector<double> nodes, weights;
    rsde::detail::gauss_legendre(24, nodes, weights);
    double s = 0.0;
    const std::size_t panels = 64;
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = -1.0 + 2.0 * static_cast<double>(p) / panels;
      const double b = a + 2.0 / panels;
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double x = 0.5 * (a + b) + 0.5 * (b - a) * nodes[q];
        s += 0.5 * (b - a) * weights[q] * std::exp(-1.0 / (1.0 - x * x));
      }
    }
    return 1.0 / s;
  }();
  return inv_mass * std::exp(-1.0 / (1.0 - u * u));
}

inline double mollifier_derivative(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double g = 1.0 - u * u;
  return mollifier(u) * (-2.0 * u / (g * g));
}

/// Numerical mass of the normalized bump (equals 1 up to quadrature error).
inline double mollifier_mass(std::size_t panels = 256, std::size_t order = 16) {
  std::vector<double> nodes, weights;
  rsde::detail::gauss_legendre(order, nodes, weights);
  double s = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = -1.0 + 2.0 * static_cast<double>(p) / static_cast<double>(panels);
    const double b = a + 2.0 / static_cast<double>(panels);
    for (std::size_t q = 0; q < nodes.size(); ++q)
      s += 0.5 * (b - a) * weights[q] * mollifier(0.5 * (a + b) + 0.5 * (b - a) * nodes[q]);
  }
  return s;
}

/// Brownian motion convolved with the bump at scale `bandwidth`, evaluated by
/// a composite rule over the underlying fine sample. The sample is extended
/// beyond the horizon by independent two-sided pads so the kernel never runs
/// off the data; the shared core on [t0, t1] stays bit-identical to the draw
/// the other families use. Discrete weights are renormalized to unit mass per
/// evaluation point, and derivative() is the exact derivative of value().
class MollifiedBrownian {
 public:
  MollifiedBrownian(const FineBrownian& fine, double bandwidth, std::uint64_t seed)
      : dim_(fine.dim), eps_(bandwidth) {
    require(bandwidth > 0.0, "MollifiedBrownian: bandwidth must be positive");
    require(fine.fine.is_uniform(), "MollifiedBrownian: needs a uniform fine sample");
    h_ = fine.fine.dt(0);
    require(bandwidth >= 2.0 * h_,
            "MollifiedBrownian: bandwidth must be at least two fine-mesh widths");
    t_lo_ = fine.fine.front();
    t_hi_ = fine.fine.back();
    pad_ = static_cast<std::size_t>(std::ceil(bandwidth / h_)) + 1;
    const std::size_t core = fine.fine.n_points();
    n_points_ = core + 2 * pad_;
    values_.assign(n_points_ * dim_, 0.0);
    // shared core
    std::copy(fine.values.begin(), fine.values.end(), values_.begin() + pad_ * dim_);
    // independent pad substreams, Brownian continuation on both sides
    for (std::size_t c = 0; c < dim_; ++c) {
      GaussianRng gl(derive_seed(seed, kTagPadLeft, c));
      double w = 0.0;  // W(t_lo) = first core value
      for (std::size_t j = 1; j <= pad_; ++j) {
        w += std::sqrt(h_) * gl.normal();
        values_[(pad_ - j) * dim_ + c] = fine.values[c] + w;
      }
      GaussianRng gr(derive_seed(seed, kTagPadRight, c));
      w = 0.0;
      const double w_end = fine.values[(core - 1) * dim_ + c];
      for (std::size_t j = 1; j <= pad_; ++j) {
        w += std::sqrt(h_) * gr.normal();
        values_[(pad_ + core - 1 + j) * dim_ + c] = w_end + w;
      }
    }
  }

  double bandwidth() const { return eps_; }

  void value(double t, std::span<double> out) const { convolve(t, out, {}); }
  void derivative(double t, std::span<double> out) const { convolve(t, {}, out); }

 private:
  double time_at(std::size_t j) const {
    return t_lo_ + (static_cast<double>(j) - static_cast<double>(pad_)) * h_;
  }

  std::pair<std::size_t, std::size_t> window(double t) const {
    const double rel = (t - (t_lo_ - static_cast<double>(pad_) * h_)) / h_;
    const double half = eps_ / h_;
    const long lo = static_cast<long>(std::floor(rel - half));
    const long hi = static_cast<long>(std::ceil(rel + half)) + 1;
    return {static_cast<std::size_t>(std::max(0L, lo)),
            static_cast<std::size_t>(std::min<long>(static_cast<long>(n_points_), hi))};
  }

  void convolve(double t, std::span<double> val_out, std::span<double> der_out) const {
    if (t < t_lo_ - 1e-12 || t > t_hi_ + 1e-12)
      throw std::invalid_argument("MollifiedBrownian: t outside the sampled horizon");
    const auto [j0, j1] = window(t);
    double s0 = 0.0, d0 = 0.0;
    std::vector<double> s1(dim_, 0.0), d1(dim_, 0.0);
    for (std::size_t j = j0; j < j1; ++j) {
      const double u = (t - time_at(j)) / eps_;
      const double w = mollifier(u);
      if (w == 0.0 && std::abs(u) >= 1.0) continue;
      const double dw = mollifier_derivative(u) / eps_;
      s0 += w;
      d0 += dw;
      const double* row = values_.data() + j * dim_;
      for (std::size_t c = 0; c < dim_; ++c) {
        s1[c] += w * row[c];
        d1[c] += dw * row[c];
      }
    }
    if (s0 <= 0.0)
      throw std::runtime_error("MollifiedBrownian: empty kernel window");
    if (!val_out.empty())
      for (std::size_t c = 0; c < dim_; ++c) val_out[c] = s1[c] / s0;
    if (!der_out.empty())
      for (std::size_t c = 0; c < dim_; ++c)
        der_out[c] = (d1[c] * s0 - s1[c] * d0) / (s0 * s0);
  }

  std::size_t dim_, pad_ = 0, n_points_ = 0;
  double eps_, h_ = 0.0, t_lo_ = 0.0, t_hi_ = 0.0;
  std::vector<double> values_;
};

inline RoughPath mollified_lift(const FineBrownian& fine, double bandwidth,
                                const TimeGrid& out_grid, std::size_t quad_order,
                                std::uint64_t seed, double alpha = 0.4) {
  const MollifiedBrownian mb(fine, bandwidth, seed);
  return lift_smooth_quadrature([&mb](double t, std::span<double> o) { mb.value(t, o); },
                                [&mb](double t, std::span<double> o) { mb.derivative(t, o); },
                                out_grid, fine.dim, quad_order, alpha);
}

// ---------------------------------------------------------------------------
// Fractional Brownian motion
// ---------------------------------------------------------------------------

/// Centered Gaussian path with stationary increments and covariance
/// (t^2H + s^2H - |t-s|^2H)/2, sampled exactly in law on a uniform grid by
/// circulant embedding of the increment covariance. The spectral Gaussian
/// stream depends only on (seed, coordinate, grid), never on H, so draws at
/// different Hurst indices from one seed are coupled.
inline std::vector<double> sample_fbm(double hurst, const TimeGrid& grid, std::size_t d,
                                      std::uint64_t seed) {
  require(hurst > 0.0 && hurst < 1.0, "sample_fbm: H must lie in (0, 1)");
  require(grid.is_uniform(), "sample_fbm: circulant embedding needs a uniform grid");
  require(std::abs(grid.front()) < 1e-14, "sample_fbm: grid must start at 0");
  const std::size_t n = grid.n_cells();
  const double h = grid.dt(0);

  // increment (fGn) autocovariance
  const std::size_t m = next_pow2(2 * n);
  const double h2h = std::pow(h, 2.0 * hurst);
  auto gamma = [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    return 0.5 * h2h *
           (std::pow(kk + 1.0, 2.0 * hurst) - 2.0 * std::pow(kk, 2.0 * hurst) +
            (k == 0 ? 0.0 : std::pow(kk - 1.0, 2.0 * hurst)));
  };
  std::vector<std::complex<double>> c(m);
  for (std::size_t j = 0; j <= m / 2; ++j) c[j] = gamma(j);
  for (std::size_t j = m / 2 + 1; j < m; ++j) c[j] = c[m - j];
  fft_radix2(c, false);

  std::vector<double> lambda(m);
  double lmax = 0.0, lmin = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    lambda[j] = c[j].real();
    lmax = std::max(lmax, lambda[j]);
    lmin = std::min(lmin, lambda[j]);
  }
  if (lmin < -1e-8 * lmax)
    throw std::runtime_error("sample_fbm: circulant embedding not positive definite (H=" +
                             std::to_string(hurst) + ", min eigenvalue " +
                             std::to_string(lmin) + ", max " + std::to_string(lmax) + ")");
  for (double& l : lambda) l = std::max(l, 0.0);

  std::vector<double> out(grid.n_points() * d, 0.0);
  std::vector<std::complex<double>> v(m);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t coord = 0; coord < d; ++coord) {
    GaussianRng g(derive_seed(seed, kTagFbm, coord));
    v[0] = g.normal();
    v[m / 2] = g.normal();
    for (std::size_t k = 1; k < m / 2; ++k) {
      const double a = g.normal(), b = g.normal();
      v[k] = std::complex<double>(a * inv_sqrt2, b * inv_sqrt2);
      v[m - k] = std::conj(v[k]);
    }
    for (std::size_t k = 0; k < m; ++k) v[k] *= std::sqrt(lambda[k]);
    fft_radix2(v, false);
    double acc = 0.0;
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::size_t k = 0; k < n; ++k) {
      acc += v[k].real() * scale;
      out[(k + 1) * d + coord] = acc;
    }
  }
  return out;
}

/// Canonical lift of a sampled fBm path: piecewise linear on the sampling
/// grid, a valid geometric lift for H > 1/3.
inline RoughPath fbm_lift(std::span<const double> values, const TimeGrid& grid,
                          std::size_t d, double hurst, double alpha = 0.4) {
  require(hurst > 1.0 / 3.0 && hurst < 1.0, "fbm_lift: H must lie in (1/3, 1)");
  return lift_piecewise_linear(values, grid, d, alpha);
}

// ---------------------------------------------------------------------------
// Per-path noise model interface
// ---------------------------------------------------------------------------

/// Sup-norm distance between the first-level partial sums of two lifts on a
/// shared grid (the plain path distance, reported alongside the rough one).
inline double sup_distance(const RoughPath& a, const RoughPath& b) {
  if (!a.grid().same_as(b.grid()) || a.dim() != b.dim())
    throw grid_mismatch_error("sup_distance: incompatible lifts");
  const std::size_t d = a.dim();
  std::vector<double> acc(d, 0.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.n_cells(); ++k) {
    const auto xa = a.inc(k), xb = b.inc(k);
    for (std::size_t i = 0; i < d; ++i) acc[i] += xa[i] - xb[i];
    worst = std::max(worst, norm2(acc));
  }
  return worst;
}

/// A reproducible family of per-path drivers: lift(grid, i) is a pure
/// function of (spec, i), so independent paths can be generated concurrently
/// with output independent of scheduling.
class NoiseModel {
 public:
  explicit NoiseModel(NoiseSpec spec) : spec_(spec) { spec_.validate(); }
  virtual ~NoiseModel() = default;

  const NoiseSpec& spec() const { return spec_; }
  std::string name() const { return family_name(spec_.family); }

  RoughPath lift(const TimeGrid& grid, std::uint64_t path_index) const {
    return build(grid, derive_seed(spec_.seed, kTagPath, path_index));
  }

 protected:
  virtual RoughPath build(const TimeGrid& grid, std::uint64_t path_seed) const = 0;
  NoiseSpec spec_;
};

namespace detail {

class BrownianModel final : public NoiseModel {
 public:
  using NoiseModel::NoiseModel;

 protected:
  RoughPath build(const TimeGrid& grid, std::uint64_t s) const override {
    const auto fine = sample_fine_brownian(grid, spec_.dim, s, spec_.fine_factor);
    const auto interp = spec_.family == Family::brownian_ito ? Interpretation::ito
                                                             : Interpretation::stratonovich;
    return brownian_lift(fine, interp, spec_.alpha);
  }
};

class WongZakaiModel final : public NoiseModel {
 public:
  using NoiseModel::NoiseModel;

 protected:
  RoughPath build(const TimeGrid& grid, std::uint64_t s) const override {
    const double span = grid.back() - grid.front();
    const double seg_real = spec_.level * span;
    const auto segments = static_cast<std::size_t>(std::llround(seg_real));
    require(segments >= 1 && std::abs(seg_real - static_cast<double>(segments)) < 1e-9,
            "wong_zakai: level * horizon must be a whole number of segments");
    const auto fine = sample_fine_brownian(grid, spec_.dim, s, spec_.fine_factor);
    return wong_zakai_lift(fine, segments, spec_.alpha);
  }
};

class KarhunenLoeveModel final : public NoiseModel {
 public:
  using NoiseModel::NoiseModel;

 protected:
  RoughPath build(const TimeGrid& grid, std::uint64_t s) const override {
    const auto fine = sample_fine_brownian(grid, spec_.dim, s, spec_.fine_factor);
    return karhunen_loeve_lift(fine, static_cast<std::size_t>(spec_.level), grid,
                               /*quad_order=*/4, spec_.alpha);
  }
};

class MollifiedModel final : public NoiseModel {
 public:
  using NoiseModel::NoiseModel;

 protected:
  RoughPath build(const TimeGrid& grid, std::uint64_t s) const override {
    const auto fine = sample_fine_brownian(grid, spec_.dim, s, spec_.fine_factor);
    return mollified_lift(fine, spec_.level, grid, /*quad_order=*/4, s, spec_.alpha);
  }
};

class FbmModel final : public NoiseModel {
 public:
  using NoiseModel::NoiseModel;

 protected:
  RoughPath build(const TimeGrid& grid, std::uint64_t s) const override {
    const auto values = sample_fbm(spec_.level, grid, spec_.dim, s);
    return fbm_lift(values, grid, spec_.dim, spec_.level, spec_.alpha);
  }
};

}  // namespace detail

inline std::unique_ptr<NoiseModel> make_noise_model(const NoiseSpec& spec) {
  switch (spec.family) {
    case Family::brownian_ito:
    case Family::brownian_strat:
      return std::make_unique<detail::BrownianModel>(spec);
    case Family::wong_zakai:
      return std::make_unique<detail::WongZakaiModel>(spec);
    case Family::karhunen_loeve:
      return std::make_unique<detail::KarhunenLoeveModel>(spec);
    case Family::mollified:
      return std::make_unique<detail::MollifiedModel>(spec);
    case Family::fbm:
      return std::make_unique<detail::FbmModel>(spec);
  }
  throw std::invalid_argument("make_noise_model: unknown family");
}

}  // namespace rsde::noise
