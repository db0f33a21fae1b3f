#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rsde/config.hpp"
#include "rsde/cost.hpp"
#include "rsde/hjb.hpp"
#include "rsde/models.hpp"
#include "rsde/noise.hpp"
#include "rsde/parallel.hpp"
#include "rsde/path_io.hpp"
#include "rsde/policy.hpp"
#include "rsde/stats.hpp"
#include "rsde/validate.hpp"

namespace rsde::xp {

inline constexpr const char* kVersion = "0.1.0";

namespace detail {

inline std::string fmt(double v, const char* spec = "%.12g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

inline void echo_config(const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) return;
  write_text_file(std::filesystem::path(cfg.out_dir) / "config.resolved.txt",
                  cfg.resolved_text());
}

}  // namespace detail

inline std::vector<double> default_levels(noise::Family f) {
  switch (f) {
    case noise::Family::wong_zakai: return {8, 32, 128, 512};
    case noise::Family::karhunen_loeve: return {8, 32, 128};
    case noise::Family::mollified: return {0.1, 0.03, 0.01};
    case noise::Family::fbm: return {0.42, 0.46, 0.49};
    default: return {0};
  }
}

// ---------------------------------------------------------------------------
// noise-convergence
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  std::string family;
  double level = 0.0;
  std::uint64_t seed = 0;
  double alpha = 0.4;
  double rho = 0.0;  // rough distance to the coupled Stratonovich lift
  double sup = 0.0;  // plain sup-norm path distance
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;

  std::string csv() const {
    std::string out = "family,level,seed,alpha,rho,sup\n";
    for (const auto& r : rows) {
      out += r.family + "," + detail::fmt(r.level, "%g") + "," + std::to_string(r.seed) +
             "," + detail::fmt(r.alpha, "%g") + "," + detail::fmt(r.rho) + "," +
             detail::fmt(r.sup) + "\n";
    }
    return out;
  }

  /// Median rho per level for one family, in the order levels were run.
  std::vector<double> median_rho(const std::string& family) const {
    std::map<double, std::vector<double>> by_level;
    std::vector<double> order;
    for (const auto& r : rows) {
      if (r.family != family) continue;
      if (!by_level.count(r.level)) order.push_back(r.level);
      by_level[r.level].push_back(r.rho);
    }
    std::vector<double> med;
    for (double l : order) med.push_back(median(by_level[l]));
    return med;
  }
};

/// For every (family, level, seed): build the coupled lift, report the rough
/// distance to the coupled Stratonovich reference on the comparison grid.
///
/// The comparison grid is deliberately coarse (compare_cells spans): on it
/// the piecewise-linear families agree with the Brownian at shared points,
/// so the metric isolates the level-2 deficit, which aggregates with a CLT
/// rate along the level sequence instead of drowning in fine-scale noise.
inline ConvergenceResult run_noise_convergence(const ExperimentConfig& cfg) {
  require(cfg.fine_cells % cfg.compare_cells == 0 && cfg.mid_cells % cfg.compare_cells == 0,
          "noise-convergence: fine/mid grids must refine the comparison grid");
  const TimeGrid compare = TimeGrid::uniform(0.0, 1.0, cfg.compare_cells);
  const std::size_t factor = cfg.fine_cells / cfg.compare_cells;
  const TimeGrid mid = TimeGrid::uniform(0.0, 1.0, cfg.mid_cells);
  const std::size_t mid_stride = cfg.mid_cells / cfg.compare_cells;

  struct Cell {
    noise::Family family;
    std::vector<double> levels;
  };
  std::vector<Cell> fams;
  std::size_t n_rows = 0;
  for (const auto& name : cfg.families) {
    Cell c;
    c.family = noise::family_from_name(name);
    c.levels = cfg.levels.empty() ? default_levels(c.family) : cfg.levels;
    n_rows += c.levels.size() * cfg.seeds;
    fams.push_back(std::move(c));
  }

  ConvergenceResult res;
  res.rows.assign(n_rows, {});
  std::size_t base = 0;
  for (const auto& cell : fams) {
    const std::size_t rows_per_seed = cell.levels.size();
    parallel_for(cfg.seeds, cfg.threads, [&, base](std::size_t r) {
      const std::uint64_t seed_r = cfg.seed0 + r;
      const std::uint64_t path_seed = derive_seed(seed_r, noise::kTagPath, 0);

      std::optional<noise::FineBrownian> fine;
      std::optional<RoughPath> ref;
      if (cell.family != noise::Family::fbm) {
        fine = noise::sample_fine_brownian(compare, cfg.dim, path_seed, factor);
        ref = noise::brownian_lift(*fine, noise::Interpretation::stratonovich,
                                   cfg.alpha_hoelder);
      }
      std::optional<RoughPath> fbm_ref;
      std::optional<TimeGrid> fbm_grid;
      if (cell.family == noise::Family::fbm) {
        fbm_grid = TimeGrid::uniform(0.0, 1.0, cfg.fine_cells);
        const auto vals = noise::sample_fbm(0.5, *fbm_grid, cfg.dim, path_seed);
        fbm_ref = restrict_stride(
            noise::fbm_lift(vals, *fbm_grid, cfg.dim, 0.5, cfg.alpha_hoelder), factor);
      }

      for (std::size_t li = 0; li < cell.levels.size(); ++li) {
        const double level = cell.levels[li];
        RoughPath lift = [&]() -> RoughPath {
          switch (cell.family) {
            case noise::Family::wong_zakai:
              return noise::wong_zakai_lift(*fine, static_cast<std::size_t>(level),
                                            cfg.alpha_hoelder);
            case noise::Family::karhunen_loeve:
              return restrict_stride(
                  noise::karhunen_loeve_lift(*fine, static_cast<std::size_t>(level), mid,
                                             cfg.quad_order, cfg.alpha_hoelder),
                  mid_stride);
            case noise::Family::mollified:
              return restrict_stride(noise::mollified_lift(*fine, level, mid, cfg.quad_order,
                                                           path_seed, cfg.alpha_hoelder),
                                     mid_stride);
            case noise::Family::fbm: {
              const auto vals = noise::sample_fbm(level, *fbm_grid, cfg.dim, path_seed);
              return restrict_stride(
                  noise::fbm_lift(vals, *fbm_grid, cfg.dim, level, cfg.alpha_hoelder),
                  factor);
            }
            case noise::Family::brownian_strat:
            case noise::Family::brownian_ito:
              return noise::brownian_lift(*fine, noise::Interpretation::stratonovich,
                                          cfg.alpha_hoelder);
          }
          throw std::invalid_argument("noise-convergence: unsupported family");
        }();
        const RoughPath& reference = cell.family == noise::Family::fbm ? *fbm_ref : *ref;
        ConvergenceRow row;
        row.family = noise::family_name(cell.family);
        row.level = level;
        row.seed = seed_r;
        row.alpha = cfg.alpha_hoelder;
        row.rho = rough_distance(lift, reference);
        row.sup = noise::sup_distance(lift, reference);
        res.rows[base + li * cfg.seeds + r] = std::move(row);
      }
    });
    base += rows_per_seed * cfg.seeds;
  }

  if (!cfg.out_dir.empty()) {
    detail::echo_config(cfg);
    detail::write_text_file(std::filesystem::path(cfg.out_dir) / "noise_convergence.csv",
                            res.csv());
  }
  return res;
}

// ---------------------------------------------------------------------------
// robustness-sweep
// ---------------------------------------------------------------------------

struct RobustnessRow {
  std::string family;
  double level = 0.0;
  std::uint64_t seed = 0;
  double j_true = 0.0, se_true = 0.0;
  double j_ideal = 0.0, se_ideal = 0.0;
  double gap = 0.0, combined_se = 0.0;
};

struct RobustnessResult {
  std::vector<RobustnessRow> rows;
  double policy_lipschitz = 0.0;
  double hjb_residual = 0.0;
  double value_at_x0 = 0.0;
  double horizon = 0.0;

  std::string csv() const {
    std::string out = "family,level,seed,J_true,SE_true,J_ideal,SE_ideal,gap,combined_SE\n";
    for (const auto& r : rows) {
      out += r.family + "," + detail::fmt(r.level, "%g") + "," + std::to_string(r.seed) +
             "," + detail::fmt(r.j_true) + "," + detail::fmt(r.se_true) + "," +
             detail::fmt(r.j_ideal) + "," + detail::fmt(r.se_ideal) + "," +
             detail::fmt(r.gap) + "," + detail::fmt(r.combined_se) + "\n";
    }
    return out;
  }

  std::vector<double> median_gap(const std::string& family,
                                 const std::vector<double>& levels) const {
    std::vector<double> med;
    for (double l : levels) {
      std::vector<double> g;
      for (const auto& r : rows)
        if (r.family == family && r.level == l) g.push_back(r.gap);
      med.push_back(median(g));
    }
    return med;
  }

  /// Pooled gap and standard error at one level (mean of replicate means).
  std::pair<double, double> pooled_gap(const std::string& family, double level) const {
    double jt = 0, ji = 0, vt = 0, vi = 0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.family != family || r.level != level) continue;
      jt += r.j_true;
      ji += r.j_ideal;
      vt += r.se_true * r.se_true;
      vi += r.se_ideal * r.se_ideal;
      ++n;
    }
    if (n == 0) return {0.0, 0.0};
    const double dn = static_cast<double>(n);
    return {std::abs(jt / dn - ji / dn), std::sqrt((vt + vi) / (dn * dn))};
  }
};

/// Build the mollified HJB policy for a config's model and criterion.
inline LipschitzPolicy derive_policy(const ExperimentConfig& cfg, const hjb::ModelSpec& ms,
                                     double* residual_out = nullptr,
                                     double* value_at_x0 = nullptr) {
  if (!cfg.policy_file.empty()) {
    std::ifstream f(cfg.policy_file);
    if (!f) throw std::invalid_argument("cannot open policy file: " + cfg.policy_file);
    return read_policy(f);
  }
  if (cfg.criterion == "discounted") {
    const auto vf = hjb::solve_discounted(ms, cfg.nx, cfg.nu);
    if (residual_out) *residual_out = vf.residual;
    if (value_at_x0) {
      const double rel = (cfg.x0 + ms.box) / vf.state.spacing();
      const auto i = std::min(static_cast<std::size_t>(rel), vf.state.n - 2);
      const double w = rel - static_cast<double>(i);
      *value_at_x0 = (1.0 - w) * vf.values[i] + w * vf.values[i + 1];
    }
    return hjb::policy_from_value(vf, ms, cfg.mollify_bandwidth);
  }
  const auto vf = hjb::solve_finite_horizon(ms, cfg.horizon, cfg.nt, cfg.nx, cfg.nu);
  if (residual_out) *residual_out = 0.0;
  if (value_at_x0) {
    const double rel = (cfg.x0 + ms.box) / vf.state.spacing();
    const auto i = std::min(static_cast<std::size_t>(rel), vf.state.n - 2);
    const double w = rel - static_cast<double>(i);
    *value_at_x0 = (1.0 - w) * vf.values[i] + w * vf.values[i + 1];
  }
  return hjb::policy_from_value(vf, ms, cfg.mollify_bandwidth);
}

/// Pipeline of the headline experiment: solve the idealized HJB, extract and
/// mollify a Lipschitz policy, then evaluate its cost under the idealized
/// Stratonovich noise and under every approximation level with common random
/// numbers, reporting the gap table.
inline RobustnessResult run_robustness_sweep(const ExperimentConfig& cfg) {
  const hjb::ModelSpec ms = models::by_name(cfg.model);
  const bool discounted = cfg.criterion == "discounted";

  RobustnessResult res;
  LipschitzPolicy pol = derive_policy(cfg, ms, &res.hjb_residual, &res.value_at_x0);
  if (!certify_lipschitz(pol))
    throw std::runtime_error("robustness-sweep: policy failed Lipschitz certification");
  res.policy_lipschitz = pol.certified_lipschitz();

  // whole horizon: integer so Wong-Zakai breakpoints align with the solver grid
  const double horizon =
      discounted ? std::ceil(cost::truncation_horizon(ms, cfg.t_trunc_tol)) : cfg.horizon;
  res.horizon = horizon;

  cost::EvalOptions opt;
  opt.cells_per_unit = cfg.cells_per_unit;
  opt.threads = 1;  // parallelism is over sweep cells below

  std::vector<noise::Family> fams;
  for (const auto& f : cfg.families) fams.push_back(noise::family_from_name(f));
  std::vector<std::vector<double>> levels(fams.size());
  std::size_t n_rows = 0;
  for (std::size_t fi = 0; fi < fams.size(); ++fi) {
    levels[fi] = cfg.levels.empty() ? default_levels(fams[fi]) : cfg.levels;
    n_rows += levels[fi].size() * cfg.seeds;
  }
  res.rows.assign(n_rows, {});

  std::size_t base = 0;
  for (std::size_t fi = 0; fi < fams.size(); ++fi) {
    parallel_for(cfg.seeds, cfg.threads, [&, fi, base](std::size_t r) {
      const std::uint64_t seed_r = cfg.seed0 + r;
      noise::NoiseSpec ideal;
      ideal.family = noise::Family::brownian_strat;
      ideal.dim = 1;
      ideal.seed = seed_r;
      ideal.fine_factor = cfg.fine_factor;
      ideal.alpha = cfg.alpha_hoelder;
      const auto ideal_model = noise::make_noise_model(ideal);
      const cost::CostEstimate j_ideal =
          discounted
              ? cost::discounted_cost(ms, *ideal_model, pol, cfg.x0, cfg.paths, horizon, opt)
              : cost::finite_horizon_cost(ms, *ideal_model, pol, cfg.x0, horizon, cfg.paths,
                                          opt);
      for (std::size_t li = 0; li < levels[fi].size(); ++li) {
        noise::NoiseSpec spec = ideal;
        spec.family = fams[fi];
        spec.level = levels[fi][li];
        const auto nm = noise::make_noise_model(spec);
        const cost::CostEstimate j_true =
            discounted
                ? cost::discounted_cost(ms, *nm, pol, cfg.x0, cfg.paths, horizon, opt)
                : cost::finite_horizon_cost(ms, *nm, pol, cfg.x0, horizon, cfg.paths, opt);
        const auto gap = cost::cost_gap(j_true, j_ideal);
        RobustnessRow row;
        row.family = noise::family_name(fams[fi]);
        row.level = levels[fi][li];
        row.seed = seed_r;
        row.j_true = j_true.mean;
        row.se_true = j_true.std_error;
        row.j_ideal = j_ideal.mean;
        row.se_ideal = j_ideal.std_error;
        row.gap = gap.gap;
        row.combined_se = gap.combined_se;
        res.rows[base + li * cfg.seeds + r] = std::move(row);
      }
    });
    base += levels[fi].size() * cfg.seeds;
  }

  if (!cfg.out_dir.empty()) {
    detail::echo_config(cfg);
    detail::write_text_file(std::filesystem::path(cfg.out_dir) / "robustness.csv", res.csv());
    std::ostringstream summary;
    summary << "{\"version\":\"" << kVersion << "\",\"model\":\"" << ms.name
            << "\",\"criterion\":\"" << cfg.criterion
            << "\",\"policy_lipschitz\":" << detail::fmt(res.policy_lipschitz)
            << ",\"hjb_residual\":" << detail::fmt(res.hjb_residual)
            << ",\"value_at_x0\":" << detail::fmt(res.value_at_x0) << ",\"levels\":{";
    for (std::size_t fi = 0; fi < fams.size(); ++fi) {
      const auto med = res.median_gap(noise::family_name(fams[fi]), levels[fi]);
      summary << (fi ? "," : "") << "\"" << noise::family_name(fams[fi]) << "\":[";
      for (std::size_t li = 0; li < med.size(); ++li)
        summary << (li ? "," : "") << detail::fmt(med[li]);
      summary << "]";
    }
    summary << "}}";
    detail::write_text_file(std::filesystem::path(cfg.out_dir) / "robustness_summary.json",
                            summary.str());
  }
  return res;
}

// ---------------------------------------------------------------------------
// hjb-solve / evaluate-cost / lift
// ---------------------------------------------------------------------------

/// Solve the configured model and export gridded value/selector tables plus
/// the mollified policy file.
inline std::string run_hjb_solve(const ExperimentConfig& cfg) {
  const hjb::ModelSpec ms = models::by_name(cfg.model);
  std::ostringstream table;
  LipschitzPolicy pol = [&] {
    if (cfg.criterion == "discounted") {
      const auto vf = hjb::solve_discounted(ms, cfg.nx, cfg.nu);
      table << "# x value selector (residual " << detail::fmt(vf.residual) << ")\n";
      for (std::size_t i = 0; i < vf.state.n; ++i)
        table << detail::fmt(vf.state.at(i), "%.17g") << ' '
              << detail::fmt(vf.values[i], "%.17g") << ' '
              << detail::fmt(vf.selector[i], "%.17g") << '\n';
      return hjb::policy_from_value(vf, ms, cfg.mollify_bandwidth);
    }
    const auto vf = hjb::solve_finite_horizon(ms, cfg.horizon, cfg.nt, cfg.nx, cfg.nu);
    table << "# t x value selector\n";
    for (std::size_t j = 0; j < vf.time.n; ++j)
      for (std::size_t i = 0; i < vf.state.n; ++i)
        table << detail::fmt(vf.time.at(j), "%.17g") << ' '
              << detail::fmt(vf.state.at(i), "%.17g") << ' '
              << detail::fmt(vf.values[j * vf.state.n + i], "%.17g") << ' '
              << detail::fmt(vf.selector[j * vf.state.n + i], "%.17g") << '\n';
    return hjb::policy_from_value(vf, ms, cfg.mollify_bandwidth);
  }();

  std::ostringstream pol_text;
  write_policy(pol_text, pol);
  if (!cfg.out_dir.empty()) {
    detail::echo_config(cfg);
    detail::write_text_file(std::filesystem::path(cfg.out_dir) / "value.tsv", table.str());
    detail::write_text_file(std::filesystem::path(cfg.out_dir) / "policy.txt",
                            pol_text.str());
  }
  return pol_text.str();
}

/// Evaluate the configured policy under a single noise spec.
inline cost::CostEstimate run_evaluate_cost(const ExperimentConfig& cfg) {
  const hjb::ModelSpec ms = models::by_name(cfg.model);
  const LipschitzPolicy pol = derive_policy(cfg, ms);
  noise::NoiseSpec spec;
  spec.family = noise::family_from_name(cfg.families.at(0));
  spec.dim = 1;
  spec.seed = cfg.seed0;
  spec.fine_factor = cfg.fine_factor;
  spec.alpha = cfg.alpha_hoelder;
  if (!cfg.levels.empty()) spec.level = cfg.levels[0];
  const auto nm = noise::make_noise_model(spec);

  cost::EvalOptions opt;
  opt.cells_per_unit = cfg.cells_per_unit;
  opt.threads = cfg.threads;
  const bool discounted = cfg.criterion == "discounted";
  const double horizon =
      discounted ? std::ceil(cost::truncation_horizon(ms, cfg.t_trunc_tol)) : cfg.horizon;
  const auto est =
      discounted ? cost::discounted_cost(ms, *nm, pol, cfg.x0, cfg.paths, horizon, opt)
                 : cost::finite_horizon_cost(ms, *nm, pol, cfg.x0, horizon, cfg.paths, opt);
  if (!cfg.out_dir.empty()) {
    detail::echo_config(cfg);
    detail::write_text_file(std::filesystem::path(cfg.out_dir) / "cost.json", est.to_json());
  }
  return est;
}

/// Build one coupled lift and serialize it in the columnar path format.
inline std::string run_lift(const ExperimentConfig& cfg) {
  ExperimentConfig one = cfg;
  one.seeds = 1;
  one.threads = 1;
  one.out_dir.clear();
  if (one.levels.empty())
    one.levels = {default_levels(noise::family_from_name(one.families.at(0))).front()};
  one.families = {cfg.families.at(0)};
  // reuse the convergence machinery to build the lift on the comparison grid
  const TimeGrid compare = TimeGrid::uniform(0.0, 1.0, cfg.compare_cells);
  const std::uint64_t path_seed = derive_seed(cfg.seed0, noise::kTagPath, 0);
  const noise::Family fam = noise::family_from_name(cfg.families.at(0));
  const double level = one.levels[0];
  RoughPath lift = [&]() -> RoughPath {
    if (fam == noise::Family::fbm) {
      const TimeGrid g = TimeGrid::uniform(0.0, 1.0, cfg.fine_cells);
      return restrict_stride(
          noise::fbm_lift(noise::sample_fbm(level, g, cfg.dim, path_seed), g, cfg.dim, level,
                          cfg.alpha_hoelder),
          cfg.fine_cells / cfg.compare_cells);
    }
    const auto fine = noise::sample_fine_brownian(compare, cfg.dim, path_seed,
                                                  cfg.fine_cells / cfg.compare_cells);
    const TimeGrid mid = TimeGrid::uniform(0.0, 1.0, cfg.mid_cells);
    switch (fam) {
      case noise::Family::brownian_strat:
        return noise::brownian_lift(fine, noise::Interpretation::stratonovich,
                                    cfg.alpha_hoelder);
      case noise::Family::brownian_ito:
        return noise::brownian_lift(fine, noise::Interpretation::ito, cfg.alpha_hoelder);
      case noise::Family::wong_zakai:
        return noise::wong_zakai_lift(fine, static_cast<std::size_t>(level),
                                      cfg.alpha_hoelder);
      case noise::Family::karhunen_loeve:
        return restrict_stride(
            noise::karhunen_loeve_lift(fine, static_cast<std::size_t>(level), mid,
                                       cfg.quad_order, cfg.alpha_hoelder),
            cfg.mid_cells / cfg.compare_cells);
      case noise::Family::mollified:
        return restrict_stride(noise::mollified_lift(fine, level, mid, cfg.quad_order,
                                                     path_seed, cfg.alpha_hoelder),
                               cfg.mid_cells / cfg.compare_cells);
      default:
        throw std::invalid_argument("lift: unsupported family");
    }
  }();
  std::ostringstream os;
  write_rough_path(os, lift);
  if (!cfg.out_dir.empty()) {
    detail::echo_config(cfg);
    detail::write_text_file(std::filesystem::path(cfg.out_dir) / "lift.txt", os.str());
  }
  return os.str();
}

}  // namespace rsde::xp
