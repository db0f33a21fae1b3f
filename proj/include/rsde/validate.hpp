#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rsde/config.hpp"
#include "rsde/cost.hpp"
#include "rsde/hjb.hpp"
#include "rsde/models.hpp"
#include "rsde/noise.hpp"
#include "rsde/policy.hpp"
#include "rsde/rde.hpp"
#include "rsde/rough_path.hpp"

namespace rsde::xp {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteResult {
  std::string name;
  std::vector<CheckResult> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

struct ValidateReport {
  std::vector<SuiteResult> suites;
  bool ok() const {
    for (const auto& s : suites)
      if (!s.passed()) return false;
    return true;
  }
  std::string to_json() const {
    std::ostringstream os;
    os << "{\"ok\":" << (ok() ? "true" : "false") << ",\"suites\":[";
    for (std::size_t i = 0; i < suites.size(); ++i) {
      const auto& s = suites[i];
      os << (i ? "," : "") << "{\"name\":\"" << s.name
         << "\",\"passed\":" << (s.passed() ? "true" : "false") << ",\"checks\":[";
      for (std::size_t j = 0; j < s.checks.size(); ++j) {
        const auto& c = s.checks[j];
        os << (j ? "," : "") << "{\"name\":\"" << c.name
           << "\",\"passed\":" << (c.passed ? "true" : "false") << ",\"detail\":\"" << c.detail
           << "\"}";
      }
      os << "]}";
    }
    os << "]}";
    return os.str();
  }
};

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline void check(SuiteResult& s, const std::string& name, bool ok, const std::string& detail) {
  s.checks.push_back({name, ok, detail});
}

inline RoughPath random_pl_lift(std::uint64_t seed, std::size_t n, std::size_t d,
                                double alpha = 0.4) {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, n);
  return lift_piecewise_linear(noise::sample_brownian(grid, d, seed), grid, d, alpha);
}

inline SuiteResult suite_rough(const ExperimentConfig& cfg) {
  SuiteResult s{"rough", {}};
  RoughPath lift = random_pl_lift(11, 256, 2);
  const auto [mx, mxx] = lift.max_levels();

  double chen = check_chen(lift, 1000);
  if (cfg.inject == "chen-corruption") {
    // corrupt one extended pair value; the triple residual must trip
    auto full = chen_extend(lift, 16, 128);
    full.xx[1] += 1e-3;
    chen = std::max(chen, chen_triple_residual(full, chen_extend(lift, 16, 64),
                                               chen_extend(lift, 64, 128)));
  }
  check(s, "chen-relation", chen <= 1e-10 * (1.0 + mxx), "residual " + num(chen));
  const double geo = check_geometric(lift);
  check(s, "geometric-symmetry", geo <= 1e-10 * (1.0 + mx * mx), "residual " + num(geo));

  {  // per-term scaling homogeneity
    const double lambda = -2.5;
    std::vector<double> inc, xx;
    for (std::size_t k = 0; k < lift.n_cells(); ++k) {
      for (double v : lift.inc(k)) inc.push_back(lambda * v);
      for (double v : lift.second(k)) xx.push_back(lambda * lambda * v);
    }
    RoughPath scaled(lift.grid(), lift.dim(), lift.alpha(), std::move(inc), std::move(xx));
    const auto base = rough_seminorm(lift);
    const auto scl = rough_seminorm(scaled);
    const bool ok = std::abs(scl.level1 - std::abs(lambda) * base.level1) <=
                        1e-10 * (1.0 + base.level1) &&
                    std::abs(scl.level2 - lambda * lambda * base.level2) <=
                        1e-10 * (1.0 + base.level2);
    check(s, "seminorm-homogeneity", ok,
          "level1 " + num(scl.level1) + " vs " + num(std::abs(lambda) * base.level1));
  }

  {  // pseudometric: symmetry and triangle inequality on random lifts
    const RoughPath a = random_pl_lift(21, 128, 2), b = random_pl_lift(22, 128, 2),
                    c = random_pl_lift(23, 128, 2);
    const double ab = rough_distance(a, b), ba = rough_distance(b, a);
    const double ac = rough_distance(a, c), cb = rough_distance(c, b);
    const bool ok = std::abs(ab - ba) <= 1e-12 * (1.0 + ab) && ab <= ac + cb + 1e-10;
    check(s, "pseudometric", ok, "d(a,b)=" + num(ab) + " d(a,c)+d(c,b)=" + num(ac + cb));
  }
  return s;
}

inline SuiteResult suite_noise(const ExperimentConfig&) {
  SuiteResult s{"noise", {}};
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 64);

  {
    const auto a = noise::sample_brownian(grid, 2, 7);
    const auto b = noise::sample_brownian(grid, 2, 7);
    check(s, "sampler-determinism", a == b, "bit equality of repeated draws");
  }
  {
    const auto fine = noise::sample_fine_brownian(grid, 2, 7, 8);
    const auto fine2 = noise::sample_fine_brownian(grid, 2, 7, 8);
    bool shared = fine.values == fine2.values;
    const RoughPath wz = noise::wong_zakai_lift(fine, 16);
    // the interpolant agrees with the Brownian at its breakpoints
    double worst = 0.0;
    std::vector<double> acc(2, 0.0);
    for (std::size_t k = 0; k < wz.n_cells(); ++k) {
      const auto x = wz.inc(k);
      for (std::size_t c = 0; c < 2; ++c) acc[c] += x[c];
      if ((k + 1) % 4 == 0) {  // every 16th fine point = breakpoint on the 64-cell grid
        const auto w = fine.at_coarse(k + 1);
        for (std::size_t c = 0; c < 2; ++c)
          worst = std::max(worst, std::abs(acc[c] - w[c]));
      }
    }
    check(s, "coupled-underlying-sample", shared && worst == 0.0,
          "breakpoint mismatch " + num(worst));
  }
  {
    const auto fine = noise::sample_fine_brownian(grid, 2, 9, 4);
    const RoughPath strat = noise::brownian_lift(fine, noise::Interpretation::stratonovich);
    const RoughPath ito = noise::brownian_lift(fine, noise::Interpretation::ito);
    double worst = 0.0;
    for (std::size_t k = 0; k < strat.n_cells(); ++k) {
      const auto a = strat.second(k);
      const auto b = ito.second(k);
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
          const double expect = i == j ? 0.5 * grid.dt(k) : 0.0;
          worst = std::max(worst, std::abs(a[i * 2 + j] - b[i * 2 + j] - expect));
        }
    }
    check(s, "strat-ito-shift", worst <= 1e-15, "max deviation " + num(worst));
  }
  {
    const double mass = noise::mollifier_mass();
    check(s, "mollifier-mass", std::abs(mass - 1.0) <= 1e-12, "mass " + num(mass));
  }
  {
    const TimeGrid cmp = TimeGrid::uniform(0.0, 1.0, 8);
    const auto fine = noise::sample_fine_brownian(cmp, 2, 13, 128);
    const TimeGrid mid = TimeGrid::uniform(0.0, 1.0, 256);
    const RoughPath kl = restrict_stride(noise::karhunen_loeve_lift(fine, 16, mid, 4), 32);
    const RoughPath wz = noise::wong_zakai_lift(fine, 32);
    const RoughPath mol =
        restrict_stride(noise::mollified_lift(fine, 0.05, mid, 4, 99), 32);
    const TimeGrid fgrid = TimeGrid::uniform(0.0, 1.0, 512);
    const auto fvals = noise::sample_fbm(0.45, fgrid, 2, 13);
    const RoughPath fb = restrict_stride(noise::fbm_lift(fvals, fgrid, 2, 0.45), 64);
    double worst = 0.0;
    for (const RoughPath* rp : {&kl, &wz, &mol, &fb}) {
      const auto [mx, mxx] = rp->max_levels();
      worst = std::max(worst, check_geometric(*rp) / (1.0 + mx * mx));
    }
    check(s, "lifts-geometric", worst <= 1e-8, "max relative residual " + num(worst));
  }
  return s;
}

inline SuiteResult suite_rde(const ExperimentConfig&) {
  SuiteResult s{"rde", {}};
  {
    // zero driver: the solver degenerates to Euler; compare against RK4
    struct Cosine {
      std::size_t state_dim = 1, driver_dim = 1;
      void eval_b(std::span<const double> y, double, std::span<double> o) const {
        o[0] = std::cos(y[0]);
      }
      void eval_sigma(std::span<const double>, std::span<double> o) const { o[0] = 0.0; }
      void eval_dsigma(std::span<const double>, std::span<double> o) const { o[0] = 0.0; }
    } model;
    const std::size_t n = 1 << 20;
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, n);
    const double y0[1] = {0.3};
    const auto sol = solve_rde(model, zero_rough_path(grid, 1), std::span<const double>(y0, 1));
    double y = 0.3;
    const double h = 1.0 / 1024.0;
    for (std::size_t k = 0; k < 1024; ++k) {
      const double k1 = std::cos(y);
      const double k2 = std::cos(y + 0.5 * h * k1);
      const double k3 = std::cos(y + 0.5 * h * k2);
      const double k4 = std::cos(y + h * k3);
      y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    const double err = std::abs(sol.value(n)[0] - y);
    check(s, "zero-noise-ode", err <= 1e-6, "error vs RK4 " + num(err));
  }
  {
    // int_0^1 x dx = 1/2, exact for the compensated sum on any grid
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 7);
    std::vector<double> samples(grid.n_points());
    for (std::size_t p = 0; p < grid.n_points(); ++p) samples[p] = grid[p];
    const RoughPath drv = lift_piecewise_linear(samples, grid, 1);
    ControlledPath cp(grid, 1, 1, samples, std::vector<double>(grid.n_points(), 1.0));
    const double val = rough_integral(cp, drv)[0];
    check(s, "linear-rough-integral", std::abs(val - 0.5) <= 1e-12, "value " + num(val));
  }
  {
    // corrected drift + Ito lift vs plain drift + Stratonovich lift
    models::SineDiffusion base;
    CorrectedDriftModel<models::SineDiffusion> corrected{base};
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 1 << 10);
    double worst = 0.0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto fine = noise::sample_fine_brownian(grid, 1, seed, 1);
      const RoughPath strat = noise::brownian_lift(fine, noise::Interpretation::stratonovich);
      const RoughPath ito = noise::brownian_lift(fine, noise::Interpretation::ito);
      const double y0[1] = {0.5};
      const auto a = solve_rde(base, strat, std::span<const double>(y0, 1));
      const auto b = solve_rde(corrected, ito, std::span<const double>(y0, 1));
      worst = std::max(worst, strong_error(a, b));
    }
    check(s, "ito-strat-consistency", worst <= 1e-3, "sup-norm gap " + num(worst));
  }
  return s;
}

inline SuiteResult suite_policy(const ExperimentConfig&) {
  SuiteResult s{"policy", {}};
  const UniformAxis axis{-2.0, 2.0, 81};
  {
    std::vector<double> bang(axis.n);
    for (std::size_t i = 0; i < axis.n; ++i) bang[i] = axis.at(i) < 0.0 ? 1.0 : -1.0;
    const auto wrapped = from_selector(axis, bang, -1.0, 1.0);
    const auto smooth = mollify(wrapped.policy, 0.2);
    const double ratio = lipschitz_check_ratio(smooth);
    check(s, "lipschitz-certificate", certify_lipschitz(smooth),
          "sampled ratio " + num(ratio) + " vs certified " +
              num(smooth.certified_lipschitz()));
  }
  {
    std::vector<double> lin(axis.n);
    for (std::size_t i = 0; i < axis.n; ++i) lin[i] = 0.25 * axis.at(i);
    const auto p = LipschitzPolicy::stationary(axis, lin, -1.0, 1.0);
    const auto sm = mollify(p, 0.3);
    double worst = 0.0;
    for (std::size_t i = 10; i + 10 < axis.n; ++i)
      worst = std::max(worst, std::abs(sm.values()[i] - lin[i]));
    std::vector<double> cst(axis.n, 0.7);
    const auto pc = mollify(LipschitzPolicy::stationary(axis, cst, -1.0, 1.0), 0.3);
    for (double v : pc.values()) worst = std::max(worst, std::abs(v - 0.7));
    check(s, "mollify-exactness", worst <= 1e-14,
          "max deviation on linear/constant " + num(worst));
  }
  return s;
}

inline SuiteResult suite_hjb(const ExperimentConfig&) {
  SuiteResult s{"hjb", {}};
  {
    const auto ms = models::constant_cost(1.0, 0.5);
    const auto vf = hjb::solve_discounted(ms, 201, 11);
    double worst = 0.0;
    for (double v : vf.values) worst = std::max(worst, std::abs(v - 2.0));
    check(s, "constant-cost-value", worst <= 1e-9 && vf.residual <= 1e-9,
          "max |V - 2| = " + num(worst) + ", residual " + num(vf.residual));
  }
  {
    const auto ms = models::symmetric_quadratic();
    const auto vf = hjb::solve_discounted(ms, 301, 21);
    double lo = 1e300, hi = -1e300;
    for (double v : vf.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    check(s, "value-bound", lo >= -1e-9 && hi <= ms.cost_bound / ms.discount + 1e-6,
          "range [" + num(lo) + ", " + num(hi) + "]");
    check(s, "hjb-residual", vf.residual <= 1e-8, "residual " + num(vf.residual));
  }
  return s;
}

inline SuiteResult suite_cost(const ExperimentConfig&) {
  SuiteResult s{"cost", {}};
  const auto ms = models::constant_cost(1.0, 0.5);
  const auto noise_model = noise::make_noise_model(
      {noise::Family::brownian_strat, 1, 5, 1, 0.0, 0.4});
  const LipschitzPolicy zero =
      LipschitzPolicy::stationary({-6.0, 6.0, 2}, {0.0, 0.0}, -1.0, 1.0);
  {
    cost::EvalOptions opt;
    opt.cells_per_unit = 64;
    const auto est = cost::discounted_cost(ms, *noise_model, zero, 0.0, 64, 40.0, opt);
    const bool ok = std::abs(est.mean - 2.0) <= 1e-4 && est.std_error == 0.0 &&
                    std::abs(est.truncation_bound - 2.0 * std::exp(-20.0)) <= 1e-15;
    check(s, "constant-cost-exact", ok,
          "mean " + num(est.mean) + " se " + num(est.std_error));
  }
  {
    auto m2 = models::constant_cost(1.0, 1.0);
    const double bound = cost::truncation_horizon(m2, std::exp(-10.0));
    check(s, "truncation-bound", std::abs(bound - 10.0) <= 1e-12,
          "T for tol e^-10 = " + num(bound));
  }
  return s;
}

}  // namespace detail

/// Execute the per-module invariant suites as a self-test.
inline ValidateReport run_validate(const ExperimentConfig& cfg) {
  if (cfg.validate_suites.empty())
    throw std::invalid_argument("run_validate: empty suite selection");
  ValidateReport rep;
  for (const auto& name : cfg.validate_suites) {
    if (name == "rough") rep.suites.push_back(detail::suite_rough(cfg));
    else if (name == "noise") rep.suites.push_back(detail::suite_noise(cfg));
    else if (name == "rde") rep.suites.push_back(detail::suite_rde(cfg));
    else if (name == "policy") rep.suites.push_back(detail::suite_policy(cfg));
    else if (name == "hjb") rep.suites.push_back(detail::suite_hjb(cfg));
    else if (name == "cost") rep.suites.push_back(detail::suite_cost(cfg));
    else throw std::invalid_argument("run_validate: unknown suite '" + name + "'");
  }
  return rep;
}

}  // namespace rsde::xp
