#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "rsde/common.hpp"
#include "rsde/hjb.hpp"
#include "rsde/noise.hpp"
#include "rsde/parallel.hpp"
#include "rsde/policy.hpp"
#include "rsde/rde.hpp"
#include "rsde/stats.hpp"

namespace rsde::cost {

/// Monte-Carlo cost estimate with explicit error accounting. The truncation
/// bound is M e^(-alpha T)/alpha for discounted runs and 0 for finite-horizon
/// runs; fingerprints identify the (model, noise, policy) triple for audit.
struct CostEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double truncation_bound = 0.0;
  std::uint64_t seed = 0;
  std::size_t excluded_paths = 0;
  std::uint64_t model_fingerprint = 0;
  std::uint64_t noise_fingerprint = 0;
  std::uint64_t policy_fingerprint = 0;

  std::string to_json() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "{\"mean\":%.17g,\"std_error\":%.17g,\"n_paths\":%zu,"
                  "\"truncation_bound\":%.17g,\"seed\":%llu,\"excluded_paths\":%zu,"
                  "\"model_fingerprint\":\"%016llx\",\"noise_fingerprint\":\"%016llx\","
                  "\"policy_fingerprint\":\"%016llx\"}",
                  mean, std_error, n_paths, truncation_bound,
                  static_cast<unsigned long long>(seed), excluded_paths,
                  static_cast<unsigned long long>(model_fingerprint),
                  static_cast<unsigned long long>(noise_fingerprint),
                  static_cast<unsigned long long>(policy_fingerprint));
    return buf;
  }
};

struct EvalOptions {
  std::size_t cells_per_unit = 512;  // solver grid resolution per unit time
  std::size_t threads = 1;
  double guard = 1e10;
  double max_excluded_fraction = 1e-3;
};

namespace detail {

/// 1-d RDE view of a ModelSpec; `corrected` switches to the Ito-form drift.
struct ScalarModel {
  const hjb::ModelSpec* ms;
  bool corrected;
  std::size_t state_dim = 1, driver_dim = 1;

  void eval_b(std::span<const double> y, double u, std::span<double> out) const {
    out[0] = corrected ? ms->corrected_drift(y[0], u) : ms->b(y[0], u);
  }
  void eval_sigma(std::span<const double> y, std::span<double> out) const {
    out[0] = ms->sigma(y[0]);
  }
  void eval_dsigma(std::span<const double> y, std::span<double> out) const {
    out[0] = ms->dsigma(y[0]);
  }
};

struct PolicyControl {
  const LipschitzPolicy* p;
  double operator()(double t, std::span<const double> y) const { return p->evaluate(t, y[0]); }
};

inline std::uint64_t noise_fingerprint(const noise::NoiseSpec& s) {
  const double sig[6] = {static_cast<double>(s.family), static_cast<double>(s.dim),
                         static_cast<double>(s.seed),   static_cast<double>(s.fine_factor),
                         s.level,                       s.alpha};
  return fnv1a(std::span<const double>(sig, 6));
}

enum class Criterion { discounted, finite_horizon };

inline CostEstimate evaluate(const hjb::ModelSpec& ms, const noise::NoiseModel& nm,
                             const LipschitzPolicy& p, double x0, std::size_t n_paths,
                             double horizon, Criterion crit, const EvalOptions& opt) {
  require(n_paths >= 1, "cost evaluation: need at least one path");
  require(horizon > 0.0, "cost evaluation: horizon must be positive");
  const auto n_cells = static_cast<std::size_t>(
      std::llround(horizon * static_cast<double>(opt.cells_per_unit)));
  require(n_cells >= 1, "cost evaluation: empty solver grid");
  const TimeGrid grid = TimeGrid::uniform(0.0, horizon, n_cells);

  const ScalarModel model{&ms, nm.spec().family == noise::Family::brownian_ito};
  const PolicyControl control{&p};
  const double alpha = ms.discount;
  const SolveOptions solve_opt{opt.guard};

  std::vector<double> per_path(n_paths, 0.0);
  std::vector<unsigned char> excluded(n_paths, 0);
  const double y0[1] = {x0};

  parallel_for(n_paths, opt.threads, [&](std::size_t i) {
    RoughPath drv = nm.lift(grid, i);
    ControlledPath sol = [&] {
      try {
        return solve_rde(model, drv, std::span<const double>(y0, 1), control, solve_opt);
      } catch (const divergence_error&) {
        excluded[i] = 1;
        return ControlledPath(grid, 1, drv.dim(),
                              std::vector<double>(grid.n_points(), 0.0),
                              std::vector<double>(grid.n_points() * drv.dim(), 0.0));
      }
    }();
    if (excluded[i]) return;
    // trapezoid accumulation of the running cost on the solver grid
    double acc = 0.0;
    for (std::size_t k = 0; k < grid.n_points(); ++k) {
      const double t = grid[k];
      const double x = sol.value(k)[0];
      const double u = p.evaluate(t, x);
      double f = ms.cost(x, u);
      if (crit == Criterion::discounted) f *= std::exp(-alpha * t);
      const double w = (k == 0 ? 0.5 * grid.dt(0)
                               : k == grid.n_points() - 1
                                     ? 0.5 * grid.dt(k - 1)
                                     : 0.5 * (grid.dt(k - 1) + grid.dt(k)));
      acc += w * f;
    }
    if (crit == Criterion::finite_horizon) acc += ms.terminal(sol.value(grid.n_points() - 1)[0]);
    per_path[i] = acc;
  });

  std::size_t n_excluded = 0;
  std::vector<double> kept;
  kept.reserve(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    if (excluded[i])
      ++n_excluded;
    else
      kept.push_back(per_path[i]);
  }
  if (static_cast<double>(n_excluded) >
      opt.max_excluded_fraction * static_cast<double>(n_paths))
    throw std::runtime_error("cost evaluation: " + std::to_string(n_excluded) +
                             " of " + std::to_string(n_paths) +
                             " paths diverged, above the exclusion budget");

  const MeanSe ms_stat = mean_se(kept);
  CostEstimate est;
  est.mean = ms_stat.mean;
  est.std_error = ms_stat.se;
  est.n_paths = kept.size();
  est.truncation_bound =
      crit == Criterion::discounted ? ms.cost_bound * std::exp(-alpha * horizon) / alpha : 0.0;
  est.seed = nm.spec().seed;
  est.excluded_paths = n_excluded;
  est.model_fingerprint = ms.fingerprint();
  est.noise_fingerprint = noise_fingerprint(nm.spec());
  est.policy_fingerprint = p.fingerprint();
  return est;
}

}  // namespace detail

/// Discounted cost of a fixed policy under the given noise family:
/// per path, solve the RDE and accumulate int_0^T e^(-alpha s) c ds by the
/// trapezoid rule on the solver grid. T must be chosen so the tail bound
/// M e^(-alpha T)/alpha meets the requested tolerance.
inline CostEstimate discounted_cost(const hjb::ModelSpec& ms, const noise::NoiseModel& nm,
                                    const LipschitzPolicy& p, double x0, std::size_t n_paths,
                                    double t_trunc, const EvalOptions& opt = {}) {
  require(ms.discount > 0.0, "discounted_cost: discount must be positive");
  return detail::evaluate(ms, nm, p, x0, n_paths, t_trunc, detail::Criterion::discounted,
                          opt);
}

/// Horizon T for a requested truncation-error tolerance.
inline double truncation_horizon(const hjb::ModelSpec& ms, double tolerance) {
  require(tolerance > 0.0, "truncation_horizon: tolerance must be positive");
  return std::log(ms.cost_bound / (ms.discount * tolerance)) / ms.discount;
}

/// Finite-horizon cost int_0^T c ds + H(X_T) of a fixed policy.
inline CostEstimate finite_horizon_cost(const hjb::ModelSpec& ms, const noise::NoiseModel& nm,
                                        const LipschitzPolicy& p, double x0, double horizon,
                                        std::size_t n_paths, const EvalOptions& opt = {}) {
  return detail::evaluate(ms, nm, p, x0, n_paths, horizon, detail::Criterion::finite_horizon,
                          opt);
}

struct GapResult {
  double gap = 0.0;
  double combined_se = 0.0;
  bool significant = false;  // gap exceeds 3 combined standard errors
};

/// |mean_a - mean_b| with standard errors combined in quadrature.
inline GapResult cost_gap(const CostEstimate& a, const CostEstimate& b) {
  GapResult r;
  r.gap = std::abs(a.mean - b.mean);
  r.combined_se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
  r.significant = r.gap > 3.0 * r.combined_se;
  return r;
}

}  // namespace rsde::cost
