#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "rsde/common.hpp"
#include "rsde/policy.hpp"

namespace rsde::hjb {

/// One-dimensional controlled diffusion model for the optimality equations:
/// drift b(x, u), diffusion sigma(x) with derivative, running cost c(x, u)
/// bounded by cost_bound, terminal cost, compact action interval, discount
/// rate and the truncation box [-box, box]. The drift passed here is the
/// Stratonovich-form drift; solvers work with the corrected drift
/// b_hat = b + (1/2) sigma' sigma.
struct ModelSpec {
  std::string name = "custom";
  std::function<double(double, double)> b;
  std::function<double(double)> sigma;
  std::function<double(double)> dsigma;
  std::function<double(double, double)> cost;
  std::function<double(double)> terminal = [](double) { return 0.0; };
  double cost_bound = 1.0;  // M, with ||c||_inf <= M
  double discount = 1.0;    // alpha > 0 (discounted criterion)
  double u_lo = -1.0, u_hi = 1.0;
  double box = 6.0;  // state box [-L, L]
  double nondegeneracy_floor = 1e-3;

  double a(double x) const {
    const double s = sigma(x);
    return 0.5 * s * s;
  }
  double corrected_drift(double x, double u) const {
    return b(x, u) + 0.5 * dsigma(x) * sigma(x);
  }

  std::uint64_t fingerprint(std::size_t probe = 17) const {
    std::vector<double> sig;
    sig.reserve(probe * 4 + 8);
    for (std::size_t i = 0; i < probe; ++i) {
      const double x = -box + 2.0 * box * static_cast<double>(i) / static_cast<double>(probe - 1);
      const double u = u_lo + (u_hi - u_lo) * static_cast<double>(i) / static_cast<double>(probe - 1);
      sig.push_back(b(x, u));
      sig.push_back(sigma(x));
      sig.push_back(cost(x, u));
      sig.push_back(terminal(x));
    }
    sig.insert(sig.end(), {cost_bound, discount, u_lo, u_hi, box, nondegeneracy_floor});
    return fnv1a(sig);
  }

  /// Grid checks of the standing assumptions: bounded cost, nondegenerate
  /// diffusion on the box, locally Lipschitz cost (finite sampled slopes).
  void validate(std::size_t nx = 201, std::size_t nu = 21) const {
    require(u_hi >= u_lo, "ModelSpec: empty action interval");
    require(box > 0.0, "ModelSpec: state box must be positive");
    const double dx = 2.0 * box / static_cast<double>(nx - 1);
    double prev_c = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = -box + static_cast<double>(i) * dx;
      if (a(x) < nondegeneracy_floor)
        throw std::invalid_argument("ModelSpec: diffusion degenerate at x=" +
                                    std::to_string(x));
      double cmax = 0.0;
      for (std::size_t j = 0; j < nu; ++j) {
        const double u = nu == 1 ? u_lo
                                 : u_lo + (u_hi - u_lo) * static_cast<double>(j) /
                                       static_cast<double>(nu - 1);
        const double c = cost(x, u);
        require_finite(c, "ModelSpec running cost");
        cmax = std::max(cmax, std::abs(c));
      }
      if (cmax > cost_bound * (1.0 + 1e-12))
        throw std::invalid_argument("ModelSpec: |c| exceeds the declared bound at x=" +
                                    std::to_string(x));
      const double c0 = cost(x, u_lo);
      if (i > 0 && std::abs(c0 - prev_c) / dx > 1e6 * (1.0 + cost_bound))
        throw std::invalid_argument("ModelSpec: cost slope blow-up near x=" +
                                    std::to_string(x));
      prev_c = c0;
    }
  }
};

/// Corrected drift b_hat = b + (1/2) sigma' sigma as a standalone function.
inline std::function<double(double, double)> corrected_drift(const ModelSpec& ms) {
  return [&ms](double x, double u) { return ms.corrected_drift(x, u); };
}

/// Discrete value function with its minimizing selector and the residual of
/// an independent re-evaluation of the optimality equation.
struct ValueFunction {
  UniformAxis state;
  UniformAxis action;
  bool time_dependent = false;
  UniformAxis time;                     // valid when time_dependent
  std::vector<double> values;           // V(x_i) or psi(t_j, x_i), time-major
  std::vector<double> selector;         // same shape
  double residual = 0.0;                // reported by hjb_residual
  std::vector<double> residual_history; // per policy-iteration sweep
  std::size_t iterations = 0;

  double value_at(std::size_t i) const { return values[i]; }
  double value_at(std::size_t j, std::size_t i) const { return values[j * state.n + i]; }
};

namespace detail {

struct Discretization {
  std::vector<double> x, u;
  double dx;
};

inline Discretization make_grids(const ModelSpec& ms, std::size_t nx, std::size_t nu) {
  require(nx >= 3, "hjb: need nx >= 3");
  require(nu >= 1, "hjb: need nu >= 1");
  Discretization g;
  g.dx = 2.0 * ms.box / static_cast<double>(nx - 1);
  g.x.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) g.x[i] = -ms.box + static_cast<double>(i) * g.dx;
  g.u.resize(nu);
  for (std::size_t j = 0; j < nu; ++j)
    g.u[j] = nu == 1 ? ms.u_lo
                     : ms.u_lo + (ms.u_hi - ms.u_lo) * static_cast<double>(j) /
                           static_cast<double>(nu - 1);
  return g;
}

/// Upwind drift + central diffusion application of L_u V at node i with
/// Neumann (zero-derivative) ghost values at the box ends.
inline double apply_operator(const std::vector<double>& v, std::size_t i, double a_i,
                             double bhat, double dx) {
  const std::size_t n = v.size();
  const double vm = i == 0 ? v[0] : v[i - 1];
  const double vp = i + 1 == n ? v[n - 1] : v[i + 1];
  const double diff = a_i * (vp - 2.0 * v[i] + vm) / (dx * dx);
  const double bp = std::max(bhat, 0.0), bm = std::min(bhat, 0.0);
  return diff + bp * (vp - v[i]) / dx + bm * (v[i] - vm) / dx;
}

inline void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                              std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

}  // namespace detail

/// Independent re-evaluation of the discounted HJB residual
///   max_i | min_u [L_u V + c](x_i) - alpha V(x_i) |
/// over interior nodes, with the same monotone discretization the solver
/// commits to (not the solver's own stopping metric).
inline double hjb_residual(const ValueFunction& vf, const ModelSpec& ms) {
  require(!vf.time_dependent, "hjb_residual: stationary value function expected");
  const std::size_t nx = vf.state.n, nu = vf.action.n;
  const double dx = vf.state.spacing();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    const double x = vf.state.at(i);
    const double a_i = ms.a(x);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nu; ++j) {
      const double u = vf.action.at(j);
      const double q =
          detail::apply_operator(vf.values, i, a_i, ms.corrected_drift(x, u), dx) +
          ms.cost(x, u);
      best = std::min(best, q);
    }
    worst = std::max(worst, std::abs(best - ms.discount * vf.values[i]));
  }
  return worst;
}

/// Policy iteration for the discounted HJB with upwind finite differences on
/// [-L, L] (Neumann boundaries) and exhaustive minimization over the action
/// grid, ties resolved toward the smaller action.
inline ValueFunction solve_discounted(const ModelSpec& ms, std::size_t nx, std::size_t nu,
                                      std::size_t max_iterations = 200) {
  require(ms.discount > 0.0, "solve_discounted: discount must be positive");
  const auto g = detail::make_grids(ms, nx, nu);
  // the discounted bound 0 <= V <= M/alpha presumes a nonnegative cost
  for (std::size_t i = 0; i < nx; i += 7)
    for (std::size_t j = 0; j < nu; ++j)
      require(ms.cost(g.x[i], g.u[j]) >= 0.0, "solve_discounted: running cost must be >= 0");

  std::vector<double> a(nx), v(nx, 0.0);
  for (std::size_t i = 0; i < nx; ++i) a[i] = ms.a(g.x[i]);

  std::vector<std::size_t> policy(nx, 0);
  ValueFunction out;
  out.state = {-ms.box, ms.box, nx};
  out.action = {ms.u_lo, ms.u_hi, nu};

  std::vector<double> lower(nx), diag(nx), upper(nx), rhs(nx);
  bool converged = false;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    // policy improvement against the current value
    bool changed = it == 0;
    for (std::size_t i = 0; i < nx; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < nu; ++j) {
        const double q =
            detail::apply_operator(v, i, a[i], ms.corrected_drift(g.x[i], g.u[j]), g.dx) +
            ms.cost(g.x[i], g.u[j]);
        if (q < best) {
          best = q;
          best_j = j;
        }
      }
      if (best_j != policy[i]) {
        policy[i] = best_j;
        changed = true;
      }
    }

    // policy evaluation: (alpha - L_u) V = c_u, tridiagonal Thomas solve
    for (std::size_t i = 0; i < nx; ++i) {
      const double bhat = ms.corrected_drift(g.x[i], g.u[policy[i]]);
      const double bp = std::max(bhat, 0.0), bm = std::min(bhat, 0.0);
      const double ax = a[i] / (g.dx * g.dx);
      double lo = -ax + bm / g.dx;
      double up = -ax - bp / g.dx;
      double dg = ms.discount + 2.0 * ax + (bp - bm) / g.dx;
      if (i == 0) {
        dg += lo;  // Neumann ghost folds the lower coefficient into the diagonal
        lo = 0.0;
      }
      if (i + 1 == nx) {
        dg += up;
        up = 0.0;
      }
      lower[i] = lo;
      diag[i] = dg;
      upper[i] = up;
      rhs[i] = ms.cost(g.x[i], g.u[policy[i]]);
    }
    std::vector<double> dl = lower, dd = diag, du = upper, rr = rhs;
    detail::solve_tridiagonal(dl, dd, du, rr);
    // independent residual of the linear solve
    double lin_res = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      double row = diag[i] * rr[i] - rhs[i];
      if (i > 0) row += lower[i] * rr[i - 1];
      if (i + 1 < nx) row += upper[i] * rr[i + 1];
      lin_res = std::max(lin_res, std::abs(row));
    }
    double dv = 0.0;
    for (std::size_t i = 0; i < nx; ++i) dv = std::max(dv, std::abs(rr[i] - v[i]));
    v = std::move(rr);

    out.values = v;
    out.residual_history.push_back(hjb_residual(out, ms));
    out.iterations = it + 1;
    if (lin_res > 1e-10 * (1.0 + ms.cost_bound))
      throw std::runtime_error("solve_discounted: linear solve residual " +
                               std::to_string(lin_res) + " exceeds tolerance");
    if (!changed && dv < 1e-9 * (1.0 + ms.cost_bound / ms.discount)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::string hist;
    for (double r : out.residual_history) hist += " " + std::to_string(r);
    throw std::runtime_error("solve_discounted: no convergence after " +
                             std::to_string(max_iterations) + " iterations; residuals:" + hist);
  }
  out.selector.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) out.selector[i] = g.u[policy[i]];
  out.values = v;
  out.residual = hjb_residual(out, ms);
  return out;
}

/// Explicit backward upwind scheme for the finite-horizon equation with
/// terminal data psi(T, x) = H(x). Internal substeps respect the CFL limit
/// 0.9 dx^2 / (2 max a) and the full monotonicity bound; the output grid
/// keeps nt + 1 time levels with the selector recorded at each level.
inline ValueFunction solve_finite_horizon(const ModelSpec& ms, double horizon, std::size_t nt,
                                          std::size_t nx, std::size_t nu) {
  require(horizon > 0.0, "solve_finite_horizon: horizon must be positive");
  require(nt >= 1, "solve_finite_horizon: need nt >= 1");
  const auto g = detail::make_grids(ms, nx, nu);
  require((nt + 1) * nx <= 20'000'000, "solve_finite_horizon: nt*nx exceeds the memory guard");

  std::vector<double> a(nx);
  double max_a = 0.0, max_b = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    a[i] = ms.a(g.x[i]);
    max_a = std::max(max_a, a[i]);
    for (std::size_t j = 0; j < nu; ++j)
      max_b = std::max(max_b, std::abs(ms.corrected_drift(g.x[i], g.u[j])));
  }
  const double dt_out = horizon / static_cast<double>(nt);
  const double dt_cfl = 0.9 * g.dx * g.dx / (2.0 * max_a);
  const double dt_mono = 0.9 / (2.0 * max_a / (g.dx * g.dx) + max_b / g.dx);
  const double dt_lim = std::min(dt_cfl, dt_mono);
  const auto substeps = static_cast<std::size_t>(std::ceil(dt_out / dt_lim));

  ValueFunction out;
  out.state = {-ms.box, ms.box, nx};
  out.action = {ms.u_lo, ms.u_hi, nu};
  out.time = {0.0, horizon, nt + 1};
  out.time_dependent = true;
  out.values.assign((nt + 1) * nx, 0.0);
  out.selector.assign((nt + 1) * nx, 0.0);

  std::vector<double> psi(nx), next(nx);
  for (std::size_t i = 0; i < nx; ++i) psi[i] = ms.terminal(g.x[i]);

  auto sweep = [&](const std::vector<double>& src, double dt, std::vector<double>& dst,
                   double* selector_row) {
    for (std::size_t i = 0; i < nx; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < nu; ++j) {
        const double q =
            detail::apply_operator(src, i, a[i], ms.corrected_drift(g.x[i], g.u[j]), g.dx) +
            ms.cost(g.x[i], g.u[j]);
        if (q < best) {
          best = q;
          best_j = j;
        }
      }
      dst[i] = src[i] + dt * best;
      if (selector_row) selector_row[i] = g.u[best_j];
    }
  };

  // terminal level: value H, selector = argmin of the operator at T
  std::copy(psi.begin(), psi.end(), out.values.begin() + nt * nx);
  sweep(psi, 0.0, next, out.selector.data() + nt * nx);

  for (std::size_t level = nt; level-- > 0;) {
    const double dt_sub = dt_out / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      sweep(psi, dt_sub, next, nullptr);
      psi.swap(next);
    }
    std::copy(psi.begin(), psi.end(), out.values.begin() + level * nx);
    sweep(psi, 0.0, next, out.selector.data() + level * nx);
  }
  return out;
}

/// Policy pipeline: wrap the minimizing selector, mollify it in x, and
/// certify the resulting class constant on random pairs.
inline LipschitzPolicy policy_from_value(const ValueFunction& vf, const ModelSpec& ms,
                                         double mollify_bandwidth) {
  LipschitzPolicy raw =
      vf.time_dependent
          ? LipschitzPolicy::time_varying(vf.time, vf.state, vf.selector, ms.u_lo, ms.u_hi)
          : LipschitzPolicy::stationary(vf.state, vf.selector, ms.u_lo, ms.u_hi);
  LipschitzPolicy smooth = mollify(raw, mollify_bandwidth);
  if (!certify_lipschitz(smooth))
    throw std::runtime_error("policy_from_value: certification failed for the mollified policy");
  return smooth;
}

}  // namespace rsde::hjb
