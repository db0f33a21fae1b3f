#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rsde/common.hpp"
#include "rsde/controlled_path.hpp"
#include "rsde/rough_path.hpp"

namespace rsde {

// Deliberately small state/driver dimensions; buffers live on the stack.
inline constexpr std::size_t kMaxDim = 8;

/// Type-erased controlled vector field dY = b(Y, u) dt + sigma(Y) dX.
///   b      : R^m x U -> R^m
///   sigma  : R^m -> R^(m x d), row-major
///   dsigma : R^m -> d sigma_ij / d y_l, flat index (i * d + j) * m + l;
///            when absent, a central finite difference with step 1e-5 is used.
struct VectorField {
  std::size_t state_dim = 1;
  std::size_t driver_dim = 1;
  std::function<void(std::span<const double>, double, std::span<double>)> b;
  std::function<void(std::span<const double>, std::span<double>)> sigma;
  std::function<void(std::span<const double>, std::span<double>)> dsigma;
  double lipschitz_bound_b = 0.0;
  double bound_b = 0.0;

  void eval_b(std::span<const double> y, double u, std::span<double> out) const {
    b(y, u, out);
  }
  void eval_sigma(std::span<const double> y, std::span<double> out) const { sigma(y, out); }
  void eval_dsigma(std::span<const double> y, std::span<double> out) const {
    if (dsigma) {
      dsigma(y, out);
      return;
    }
    // finite-difference fallback, step 1e-5
    const double h = 1e-5;
    const std::size_t m = state_dim, d = driver_dim;
    std::array<double, kMaxDim> yp{}, ym{};
    std::array<double, kMaxDim * kMaxDim> sp{}, sm{};
    for (std::size_t l = 0; l < m; ++l) {
      for (std::size_t i = 0; i < m; ++i) yp[i] = ym[i] = y[i];
      yp[l] += h;
      ym[l] -= h;
      sigma(std::span<const double>(yp.data(), m), std::span<double>(sp.data(), m * d));
      sigma(std::span<const double>(ym.data(), m), std::span<double>(sm.data(), m * d));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d; ++j)
          out[(i * d + j) * m + l] = (sp[i * d + j] - sm[i * d + j]) / (2.0 * h);
    }
  }
};

/// Max relative mismatch between a model's dsigma and a central finite
/// difference of its sigma, over the supplied sample states.
template <class Model>
double dsigma_fd_residual(const Model& vf, std::span<const double> sample_states) {
  const std::size_t m = vf.state_dim, d = vf.driver_dim;
  require(sample_states.size() % m == 0, "dsigma_fd_residual: sample shape");
  const double h = 1e-5;
  std::array<double, kMaxDim> yp{}, ym{};
  std::array<double, kMaxDim * kMaxDim> sp{}, sm{};
  std::array<double, kMaxDim * kMaxDim * kMaxDim> ds{};
  double worst = 0.0;
  for (std::size_t s = 0; s < sample_states.size() / m; ++s) {
    const std::span<const double> y(sample_states.data() + s * m, m);
    vf.eval_dsigma(y, std::span<double>(ds.data(), m * d * m));
    for (std::size_t l = 0; l < m; ++l) {
      for (std::size_t i = 0; i < m; ++i) yp[i] = ym[i] = y[i];
      yp[l] += h;
      ym[l] -= h;
      vf.eval_sigma(std::span<const double>(yp.data(), m), std::span<double>(sp.data(), m * d));
      vf.eval_sigma(std::span<const double>(ym.data(), m), std::span<double>(sm.data(), m * d));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          const double fd = (sp[i * d + j] - sm[i * d + j]) / (2.0 * h);
          const double an = ds[(i * d + j) * m + l];
          worst = std::max(worst, std::abs(fd - an) / (1.0 + std::abs(an)));
        }
    }
  }
  return worst;
}

struct SolveOptions {
  double guard = 1e10;  // divergence guard box [-guard, guard]^m
};

struct NoControl {
  double operator()(double, std::span<const double>) const { return 0.0; }
};

/// One explicit second-order rough Taylor (Davie) step per grid cell:
///   y_{k+1} = y_k + b(y_k, u_k) dt + sigma(y_k) X_k + (dsigma . sigma)(y_k) : XX_k,
/// where the contraction is sum_{j,k,l} (d sigma_ij / d y_l) sigma_lk XX_{kj}.
/// The control is evaluated at the left endpoint; the Gubinelli derivative of
/// the solution is recorded as y'_k = sigma(y_k).
template <class Model, class Control>
ControlledPath solve_rde(const Model& vf, const RoughPath& drv, std::span<const double> y0,
                         Control&& control, const SolveOptions& opt = {}) {
  const std::size_t m = vf.state_dim, d = vf.driver_dim;
  require(m >= 1 && m <= kMaxDim && d >= 1 && d <= kMaxDim,
          "solve_rde: state/driver dims must be within the small-dimension design");
  require(d == drv.dim(), "solve_rde: driver dimension mismatch");
  require(y0.size() == m, "solve_rde: initial state size mismatch");
  for (double v : y0) require_finite(v, "solve_rde: initial state");

  const std::size_t n = drv.n_cells();
  std::vector<double> values((n + 1) * m), gub((n + 1) * m * d);

  std::array<double, kMaxDim> y{}, by{};
  std::array<double, kMaxDim * kMaxDim> sig{};
  std::array<double, kMaxDim * kMaxDim * kMaxDim> dsig{};
  for (std::size_t i = 0; i < m; ++i) y[i] = y0[i];

  const std::span<double> sig_span(sig.data(), m * d);
  const std::span<double> dsig_span(dsig.data(), m * d * m);
  const std::span<double> b_span(by.data(), m);
  const std::span<const double> y_span(y.data(), m);

  for (std::size_t k = 0; k <= n; ++k) {
    vf.eval_sigma(y_span, sig_span);
    for (std::size_t i = 0; i < m; ++i) values[k * m + i] = y[i];
    for (std::size_t i = 0; i < m * d; ++i) gub[k * m * d + i] = sig[i];
    if (k == n) break;

    const double t = drv.grid()[k];
    const double dt = drv.grid().dt(k);
    const double u = control(t, y_span);
    vf.eval_b(y_span, u, b_span);
    vf.eval_dsigma(y_span, dsig_span);

    const auto x = drv.inc(k);
    const auto xx = drv.second(k);
    for (std::size_t i = 0; i < m; ++i) {
      double step = by[i] * dt;
      for (std::size_t j = 0; j < d; ++j) step += sig[i * d + j] * x[j];
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t kk = 0; kk < d; ++kk) {
          double a = 0.0;  // (dsigma . sigma)_{i,kj}
          for (std::size_t l = 0; l < m; ++l)
            a += dsig[(i * d + j) * m + l] * sig[l * d + kk];
          step += a * xx[kk * d + j];
        }
      }
      y[i] += step;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!(std::abs(y[i]) <= opt.guard) || !std::isfinite(y[i]))
        throw divergence_error(k, "solve_rde: state escaped the guard box at step " +
                                      std::to_string(k));
    }
  }
  return ControlledPath(drv.grid(), m, d, std::move(values), std::move(gub));
}

template <class Model>
ControlledPath solve_rde(const Model& vf, const RoughPath& drv, std::span<const double> y0,
                         const SolveOptions& opt = {}) {
  return solve_rde(vf, drv, y0, NoControl{}, opt);
}

/// Drift correction b_hat = b + (1/2)(dsigma) sigma equating the Stratonovich
/// model with drift b and the Ito model with drift b_hat:
///   [(dsigma) sigma]_i = sum_{j,l} (d sigma_ij / d y_l) sigma_lj.
template <class Model>
struct CorrectedDriftModel {
  const Model& base;
  std::size_t state_dim = base.state_dim;
  std::size_t driver_dim = base.driver_dim;

  void eval_b(std::span<const double> y, double u, std::span<double> out) const {
    const std::size_t m = base.state_dim, d = base.driver_dim;
    base.eval_b(y, u, out);
    std::array<double, kMaxDim * kMaxDim> sig{};
    std::array<double, kMaxDim * kMaxDim * kMaxDim> dsig{};
    base.eval_sigma(y, std::span<double>(sig.data(), m * d));
    base.eval_dsigma(y, std::span<double>(dsig.data(), m * d * m));
    for (std::size_t i = 0; i < m; ++i) {
      double corr = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t l = 0; l < m; ++l)
          corr += dsig[(i * d + j) * m + l] * sig[l * d + j];
      out[i] += 0.5 * corr;
    }
  }
  void eval_sigma(std::span<const double> y, std::span<double> out) const {
    base.eval_sigma(y, out);
  }
  void eval_dsigma(std::span<const double> y, std::span<double> out) const {
    base.eval_dsigma(y, out);
  }
};

/// All-zero driver on a grid (reduces the solver to an Euler ODE step).
inline RoughPath zero_rough_path(const TimeGrid& grid, std::size_t d, double alpha = 0.4) {
  return RoughPath(grid, d, alpha, std::vector<double>(grid.n_cells() * d, 0.0),
                   std::vector<double>(grid.n_cells() * d * d, 0.0));
}

}  // namespace rsde
