#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rsde/hjb.hpp"

namespace rsde::models {

// --- pure RDE test models (m = d = 1) ---

/// dY = Y dX; driven by a Stratonovich Brownian lift the solution is
/// y0 exp(W(t)).
struct GeometricBrownian {
  std::size_t state_dim = 1, driver_dim = 1;
  void eval_b(std::span<const double>, double, std::span<double> out) const { out[0] = 0.0; }
  void eval_sigma(std::span<const double> y, std::span<double> out) const { out[0] = y[0]; }
  void eval_dsigma(std::span<const double>, std::span<double> out) const { out[0] = 1.0; }
};

/// dY = (sin Y + 2) dX; bounded diffusion with bounded derivatives.
struct SineDiffusion {
  std::size_t state_dim = 1, driver_dim = 1;
  void eval_b(std::span<const double>, double, std::span<double> out) const { out[0] = 0.0; }
  void eval_sigma(std::span<const double> y, std::span<double> out) const {
    out[0] = std::sin(y[0]) + 2.0;
  }
  void eval_dsigma(std::span<const double> y, std::span<double> out) const {
    out[0] = std::cos(y[0]);
  }
};

// --- named 1-d control models for the HJB / cost experiments ---

inline double clip_quadratic(double x, double cap = 4.0) {
  return std::min(x * x, cap);
}

/// The symmetric benchmark: b = u on U = [-1, 1], sigma = 1,
/// c = min(x^2, 4) + 0.1 u^2, discount 1, box [-6, 6]. The cost is flat in x
/// near the box ends, so the Neumann truncation error stays at the boundary.
inline hjb::ModelSpec symmetric_quadratic() {
  hjb::ModelSpec ms;
  ms.name = "symmetric-quadratic";
  ms.b = [](double, double u) { return u; };
  ms.sigma = [](double) { return 1.0; };
  ms.dsigma = [](double) { return 0.0; };
  ms.cost = [](double x, double u) { return clip_quadratic(x) + 0.1 * u * u; };
  ms.terminal = [](double x) { return 0.5 * clip_quadratic(x); };
  ms.cost_bound = 4.1;
  ms.discount = 1.0;
  ms.u_lo = -1.0;
  ms.u_hi = 1.0;
  ms.box = 6.0;
  ms.nondegeneracy_floor = 0.4;
  return ms;
}

/// Constant running cost; the discounted value is identically M / alpha.
inline hjb::ModelSpec constant_cost(double c0 = 1.0, double discount = 0.5) {
  hjb::ModelSpec ms;
  ms.name = "constant-cost";
  ms.b = [](double, double u) { return u; };
  ms.sigma = [](double) { return 1.0; };
  ms.dsigma = [](double) { return 0.0; };
  ms.cost = [c0](double, double) { return c0; };
  ms.terminal = [](double) { return 0.0; };
  ms.cost_bound = c0;
  ms.discount = discount;
  ms.u_lo = -1.0;
  ms.u_hi = 1.0;
  ms.box = 6.0;
  ms.nondegeneracy_floor = 0.4;
  return ms;
}

/// Uncontrolled mean-reverting model with capped quadratic cost; used for
/// the HJB vs Monte-Carlo cross-check.
inline hjb::ModelSpec ou_quadratic() {
  hjb::ModelSpec ms;
  ms.name = "ou-quadratic";
  ms.b = [](double x, double) { return -x; };
  ms.sigma = [](double) { return 1.0; };
  ms.dsigma = [](double) { return 0.0; };
  ms.cost = [](double x, double) { return clip_quadratic(x); };
  ms.terminal = [](double x) { return 0.5 * clip_quadratic(x); };
  ms.cost_bound = 4.0;
  ms.discount = 1.0;
  ms.u_lo = 0.0;
  ms.u_hi = 0.0;
  ms.box = 6.0;
  ms.nondegeneracy_floor = 0.4;
  return ms;
}

/// Uncontrolled Ornstein-Uhlenbeck with (clipped) linear cost; the discounted
/// cost from x0 is x0 / (alpha + 1) up to the clipping error. The cost takes
/// both signs, so this model is for Monte-Carlo evaluation only, not for the
/// discounted HJB bound.
inline hjb::ModelSpec ou_linear(double cap = 20.0) {
  hjb::ModelSpec ms;
  ms.name = "ou-linear";
  ms.b = [](double x, double) { return -x; };
  ms.sigma = [](double) { return 1.0; };
  ms.dsigma = [](double) { return 0.0; };
  ms.cost = [cap](double x, double) { return std::clamp(x, -cap, cap); };
  ms.terminal = [](double) { return 0.0; };
  ms.cost_bound = cap;
  ms.discount = 1.0;
  ms.u_lo = 0.0;
  ms.u_hi = 0.0;
  ms.box = 30.0;
  ms.nondegeneracy_floor = 0.4;
  return ms;
}

/// Uncontrolled state-dependent diffusion sigma = sin x + 2 with capped
/// quadratic cost; exercises the drift correction in both solvers.
inline hjb::ModelSpec sine_diffusion_model() {
  hjb::ModelSpec ms;
  ms.name = "sine-diffusion";
  ms.b = [](double, double) { return 0.0; };
  ms.sigma = [](double x) { return std::sin(x) + 2.0; };
  ms.dsigma = [](double x) { return std::cos(x); };
  ms.cost = [](double x, double) { return clip_quadratic(x); };
  ms.terminal = [](double x) { return 0.5 * clip_quadratic(x); };
  ms.cost_bound = 4.0;
  ms.discount = 1.0;
  ms.u_lo = 0.0;
  ms.u_hi = 0.0;
  ms.box = 6.0;
  ms.nondegeneracy_floor = 0.4;
  return ms;
}

inline hjb::ModelSpec by_name(const std::string& name) {
  if (name == "symmetric-quadratic") return symmetric_quadratic();
  if (name == "constant-cost") return constant_cost();
  if (name == "ou-quadratic") return ou_quadratic();
  if (name == "ou-linear") return ou_linear();
  if (name == "sine-diffusion") return sine_diffusion_model();
  throw std::invalid_argument("unknown model: " + name);
}

inline std::vector<std::string> model_names() {
  return {"symmetric-quadratic", "constant-cost", "ou-quadratic", "ou-linear",
          "sine-diffusion"};
}

}  // namespace rsde::models
