#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rsde/common.hpp"
#include "rsde/noise.hpp"
#include "rsde/rng.hpp"

namespace rsde {

/// Uniform node axis on [lo, hi] with n >= 2 nodes.
struct UniformAxis {
  double lo = 0.0, hi = 1.0;
  std::size_t n = 2;

  void validate() const {
    require(n >= 2 && hi > lo, "UniformAxis: need n >= 2 nodes on a proper interval");
  }
  double spacing() const { return n < 2 ? hi - lo : (hi - lo) / static_cast<double>(n - 1); }
  double at(std::size_t i) const {
    return n < 2 ? lo
                 : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
};

/// Markov feedback map with node values on a uniform grid, evaluated by
/// clamped piecewise-linear (or bilinear) interpolation. Clamping plus the
/// node slope bound makes the map globally Lipschitz; certified_lipschitz
/// is the exported constant (default headroom factor 1.25 over the raw
/// max slope). Immutable after construction.
class LipschitzPolicy {
 public:
  enum class Kind { stationary, time_varying };

  static constexpr double kCertifyHeadroom = 1.25;

  static LipschitzPolicy stationary(UniformAxis state, std::vector<double> values,
                                    double u_lo, double u_hi) {
    state.validate();
    require(values.size() == state.n, "LipschitzPolicy: node count mismatch");
    LipschitzPolicy p;
    p.kind_ = Kind::stationary;
    p.state_ = state;
    p.u_lo_ = u_lo;
    p.u_hi_ = u_hi;
    p.values_ = std::move(values);
    p.finish();
    return p;
  }

  static LipschitzPolicy time_varying(UniformAxis time, UniformAxis state,
                                      std::vector<double> values, double u_lo, double u_hi) {
    time.validate();
    state.validate();
    require(values.size() == time.n * state.n, "LipschitzPolicy: node count mismatch");
    LipschitzPolicy p;
    p.kind_ = Kind::time_varying;
    p.time_ = time;
    p.state_ = state;
    p.u_lo_ = u_lo;
    p.u_hi_ = u_hi;
    p.values_ = std::move(values);
    p.finish();
    return p;
  }

  Kind kind() const { return kind_; }
  double u_lo() const { return u_lo_; }
  double u_hi() const { return u_hi_; }
  const UniformAxis& state_axis() const { return state_; }
  const UniformAxis& time_axis() const { return time_; }
  const std::vector<double>& values() const { return values_; }

  /// Max adjacent-node slope (state direction, and time direction if any).
  double max_slope() const { return raw_slope_; }
  double certified_lipschitz() const { return certified_; }

  double evaluate(double x) const { return evaluate(0.0, x); }

  double evaluate(double t, double x) const {
    const auto [i, wx] = locate(state_, x);
    if (kind_ == Kind::stationary)
      return (1.0 - wx) * values_[i] + wx * values_[i + 1];
    const auto [j, wt] = locate(time_, t);
    const double* row0 = values_.data() + j * state_.n;
    const double* row1 = values_.data() + (j + 1) * state_.n;
    const double v0 = (1.0 - wx) * row0[i] + wx * row0[i + 1];
    const double v1 = (1.0 - wx) * row1[i] + wx * row1[i + 1];
    return (1.0 - wt) * v0 + wt * v1;
  }

  std::uint64_t fingerprint() const {
    std::uint64_t h = fnv1a(values_);
    const double meta[8] = {static_cast<double>(kind_ == Kind::stationary ? 0 : 1),
                            state_.lo,
                            state_.hi,
                            static_cast<double>(state_.n),
                            time_.lo,
                            time_.hi,
                            u_lo_,
                            u_hi_};
    return fnv1a(std::span<const double>(meta, 8), h);
  }

 private:
  static std::pair<std::size_t, double> locate(const UniformAxis& ax, double v) {
    const double c = std::clamp(v, ax.lo, ax.hi);
    const double rel = (c - ax.lo) / ax.spacing();
    std::size_t i = std::min(static_cast<std::size_t>(rel), ax.n - 2);
    return {i, std::clamp(rel - static_cast<double>(i), 0.0, 1.0)};
  }

  void finish() {
    require(u_hi_ >= u_lo_, "LipschitzPolicy: empty action interval");
    for (double& v : values_) {
      require_finite(v, "LipschitzPolicy node value");
      v = std::clamp(v, u_lo_, u_hi_);
    }
    raw_slope_ = 0.0;
    const std::size_t nt = kind_ == Kind::time_varying ? time_.n : 1;
    for (std::size_t j = 0; j < nt; ++j)
      for (std::size_t i = 0; i + 1 < state_.n; ++i)
        raw_slope_ = std::max(raw_slope_,
                              std::abs(values_[j * state_.n + i + 1] - values_[j * state_.n + i]) /
                                  state_.spacing());
    if (kind_ == Kind::time_varying) {
      for (std::size_t j = 0; j + 1 < time_.n; ++j)
        for (std::size_t i = 0; i < state_.n; ++i)
          raw_slope_ = std::max(raw_slope_,
                                std::abs(values_[(j + 1) * state_.n + i] - values_[j * state_.n + i]) /
                                    time_.spacing());
    }
    certified_ = kCertifyHeadroom * raw_slope_;
  }

  Kind kind_ = Kind::stationary;
  UniformAxis state_{}, time_{};
  double u_lo_ = 0.0, u_hi_ = 0.0;
  double raw_slope_ = 0.0, certified_ = 0.0;
  std::vector<double> values_;
};

struct SelectorWrap {
  LipschitzPolicy policy;
  double raw_max_slope;  // before any mollification; large values signal
                         // that smoothing is required for class membership
};

/// Wrap a (possibly discontinuous) minimizing selector sampled on a grid.
inline SelectorWrap from_selector(UniformAxis state, std::vector<double> selector_values,
                                  double u_lo, double u_hi) {
  auto p = LipschitzPolicy::stationary(state, std::move(selector_values), u_lo, u_hi);
  const double raw = p.max_slope();
  return {std::move(p), raw};
}

inline SelectorWrap from_selector(UniformAxis time, UniformAxis state,
                                  std::vector<double> selector_values, double u_lo,
                                  double u_hi) {
  auto p = LipschitzPolicy::time_varying(time, state, std::move(selector_values), u_lo, u_hi);
  const double raw = p.max_slope();
  return {std::move(p), raw};
}

/// Smooth the node values by discrete convolution (in x only) with the
/// compactly supported bump at scale `bandwidth`. Weights are symmetric and
/// renormalized to unit mass, so constants are preserved exactly and linear
/// stretches are fixed away from the boundary; boundary nodes use replicated
/// edge values, matching the clamped evaluation.
inline LipschitzPolicy mollify(const LipschitzPolicy& p, double bandwidth) {
  const double dx = p.state_axis().spacing();
  require(bandwidth > dx, "mollify: bandwidth must exceed the grid spacing");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(bandwidth / dx));
  std::vector<double> w(2 * radius + 1);
  double mass = 0.0;
  for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
    w[j + radius] = noise::mollifier(static_cast<double>(j) * dx / bandwidth);
    mass += w[j + radius];
  }
  for (double& x : w) x /= mass;

  const std::size_t nx = p.state_axis().n;
  const std::size_t nt =
      p.kind() == LipschitzPolicy::Kind::time_varying ? p.time_axis().n : 1;
  std::vector<double> out(p.values().size());
  for (std::size_t slice = 0; slice < nt; ++slice) {
    const double* src = p.values().data() + slice * nx;
    for (std::size_t i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
        const auto idx = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) + j, 0,
                                                    static_cast<std::ptrdiff_t>(nx) - 1);
        acc += w[j + radius] * src[idx];
      }
      out[slice * nx + i] = acc;
    }
  }
  if (p.kind() == LipschitzPolicy::Kind::time_varying)
    return LipschitzPolicy::time_varying(p.time_axis(), p.state_axis(), std::move(out),
                                         p.u_lo(), p.u_hi());
  return LipschitzPolicy::stationary(p.state_axis(), std::move(out), p.u_lo(), p.u_hi());
}

/// Sampled certificate of the class membership: |h(t1,x) - h(t2,y)| against
/// M (|t1 - t2| + |x - y|) on random pairs drawn over the node box (with
/// excursions past the boundary to exercise clamping). Returns the max ratio.
inline double lipschitz_check_ratio(const LipschitzPolicy& p, std::size_t n_pairs = 10000,
                                    std::uint64_t seed = 0x11ca4e) {
  GaussianRng rng(seed);
  const auto& sx = p.state_axis();
  const double margin = 0.25 * (sx.hi - sx.lo);
  auto rand_x = [&] { return sx.lo - margin + (sx.hi - sx.lo + 2 * margin) * rng.uniform(); };
  const bool tv = p.kind() == LipschitzPolicy::Kind::time_varying;
  const auto& tx = p.time_axis();
  double worst = 0.0;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const double x1 = rand_x(), x2 = rand_x();
    const double t1 = tv ? tx.lo + (tx.hi - tx.lo) * rng.uniform() : 0.0;
    const double t2 = tv ? tx.lo + (tx.hi - tx.lo) * rng.uniform() : 0.0;
    const double lhs = std::abs(p.evaluate(t1, x1) - p.evaluate(t2, x2));
    const double rhs = std::abs(t1 - t2) + std::abs(x1 - x2);
    if (rhs > 1e-12) worst = std::max(worst, lhs / rhs);
  }
  return worst;
}

inline bool certify_lipschitz(const LipschitzPolicy& p, std::size_t n_pairs = 10000,
                              std::uint64_t seed = 0x11ca4e) {
  return lipschitz_check_ratio(p, n_pairs, seed) <= p.certified_lipschitz() + 1e-12;
}

// --- text round trip ---

inline void write_policy(std::ostream& os, const LipschitzPolicy& p) {
  auto f = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  const bool tv = p.kind() == LipschitzPolicy::Kind::time_varying;
  os << "# rsde-policy v1\n";
  os << "# kind=" << (tv ? "time_varying" : "stationary") << " u_lo=" << f(p.u_lo())
     << " u_hi=" << f(p.u_hi()) << " certified=" << f(p.certified_lipschitz()) << "\n";
  os << "# state lo=" << f(p.state_axis().lo) << " hi=" << f(p.state_axis().hi)
     << " n=" << p.state_axis().n << "\n";
  if (tv)
    os << "# time lo=" << f(p.time_axis().lo) << " hi=" << f(p.time_axis().hi)
       << " n=" << p.time_axis().n << "\n";
  for (double v : p.values()) os << f(v) << "\n";
}

inline LipschitzPolicy read_policy(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# rsde-policy v1", 0) != 0)
    throw std::invalid_argument("read_policy: missing format header");
  char kind[32] = {0};
  double u_lo = 0, u_hi = 0, certified = 0;
  if (!std::getline(is, line) ||
      std::sscanf(line.c_str(), "# kind=%31s u_lo=%lg u_hi=%lg certified=%lg", kind, &u_lo,
                  &u_hi, &certified) != 4)
    throw std::invalid_argument("read_policy: malformed kind line");
  UniformAxis state;
  if (!std::getline(is, line) ||
      std::sscanf(line.c_str(), "# state lo=%lg hi=%lg n=%zu", &state.lo, &state.hi,
                  &state.n) != 3)
    throw std::invalid_argument("read_policy: malformed state axis line");
  const bool tv = std::string(kind) == "time_varying";
  UniformAxis time;
  std::size_t count = state.n;
  if (tv) {
    if (!std::getline(is, line) ||
        std::sscanf(line.c_str(), "# time lo=%lg hi=%lg n=%zu", &time.lo, &time.hi,
                    &time.n) != 3)
      throw std::invalid_argument("read_policy: malformed time axis line");
    count *= time.n;
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line))
      throw std::invalid_argument("read_policy: truncated value list");
    values[i] = std::stod(line);
  }
  return tv ? LipschitzPolicy::time_varying(time, state, std::move(values), u_lo, u_hi)
            : LipschitzPolicy::stationary(state, std::move(values), u_lo, u_hi);
}

}  // namespace rsde
