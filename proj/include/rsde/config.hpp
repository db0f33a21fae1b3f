#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rsde/common.hpp"

namespace rsde::xp {

/// Configuration error carrying the offending line for CLI reporting.
struct config_error : std::invalid_argument {
  int line;
  config_error(int line_no, const std::string& what)
      : std::invalid_argument("config line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};

/// Flat `key = value` file with '#' comments. Unknown keys are rejected.
struct ExperimentConfig {
  std::string experiment = "validate";
  std::string model = "symmetric-quadratic";
  std::string criterion = "discounted";  // discounted | finite-horizon
  std::vector<std::string> families = {"wong_zakai"};
  std::vector<double> levels;
  std::size_t dim = 2;
  std::size_t seeds = 20;
  std::uint64_t seed0 = 1;
  double alpha_hoelder = 0.4;
  std::size_t fine_factor = 1;
  std::size_t fine_cells = 4096;
  std::size_t compare_cells = 8;
  std::size_t mid_cells = 512;
  std::size_t quad_order = 4;
  std::size_t nx = 601;
  std::size_t nu = 41;
  std::size_t nt = 64;
  std::size_t paths = 10000;
  std::size_t cells_per_unit = 1024;
  double x0 = 1.0;
  double horizon = 1.0;
  double t_trunc_tol = 1e-6;
  double mollify_bandwidth = 0.12;
  std::string policy_file;  // empty = HJB-derived
  std::vector<std::string> validate_suites = {"rough", "noise", "rde", "policy", "hjb", "cost"};
  std::string inject = "none";  // test fixture hook: none | chen-corruption
  std::string out_dir;
  std::size_t threads = 1;

  std::string resolved_text() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  static const std::set<std::string> known = {
      "experiment",   "model",          "criterion",      "noise.families",
      "noise.levels", "noise.dim",      "seeds",          "seed0",
      "alpha.hoelder", "noise.fine_factor", "noise.fine_cells", "noise.compare_cells",
      "noise.mid_cells", "quad_order",  "grid.nx",        "grid.nu",
      "grid.nt",      "paths",          "cells_per_unit", "x0",
      "horizon",      "t_trunc_tol",    "mollify_bandwidth", "policy_file",
      "validate.suites", "inject",      "out",            "threads"};

  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error(line_no, "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (!known.count(key)) throw config_error(line_no, "unknown key '" + key + "'");
    if (val.empty()) throw config_error(line_no, "empty value for '" + key + "'");
    try {
      if (key == "experiment") cfg.experiment = val;
      else if (key == "model") cfg.model = val;
      else if (key == "criterion") cfg.criterion = val;
      else if (key == "noise.families") cfg.families = detail::split_list(val);
      else if (key == "noise.levels") {
        cfg.levels.clear();
        for (const auto& tok : detail::split_list(val)) cfg.levels.push_back(std::stod(tok));
      } else if (key == "noise.dim") cfg.dim = std::stoul(val);
      else if (key == "seeds") cfg.seeds = std::stoul(val);
      else if (key == "seed0") cfg.seed0 = std::stoull(val);
      else if (key == "alpha.hoelder") cfg.alpha_hoelder = std::stod(val);
      else if (key == "noise.fine_factor") cfg.fine_factor = std::stoul(val);
      else if (key == "noise.fine_cells") cfg.fine_cells = std::stoul(val);
      else if (key == "noise.compare_cells") cfg.compare_cells = std::stoul(val);
      else if (key == "noise.mid_cells") cfg.mid_cells = std::stoul(val);
      else if (key == "quad_order") cfg.quad_order = std::stoul(val);
      else if (key == "grid.nx") cfg.nx = std::stoul(val);
      else if (key == "grid.nu") cfg.nu = std::stoul(val);
      else if (key == "grid.nt") cfg.nt = std::stoul(val);
      else if (key == "paths") cfg.paths = std::stoul(val);
      else if (key == "cells_per_unit") cfg.cells_per_unit = std::stoul(val);
      else if (key == "x0") cfg.x0 = std::stod(val);
      else if (key == "horizon") cfg.horizon = std::stod(val);
      else if (key == "t_trunc_tol") cfg.t_trunc_tol = std::stod(val);
      else if (key == "mollify_bandwidth") cfg.mollify_bandwidth = std::stod(val);
      else if (key == "policy_file") cfg.policy_file = val;
      else if (key == "validate.suites") cfg.validate_suites = detail::split_list(val);
      else if (key == "inject") cfg.inject = val;
      else if (key == "out") cfg.out_dir = val;
      else if (key == "threads") cfg.threads = std::stoul(val);
    } catch (const config_error&) {
      throw;
    } catch (const std::exception& e) {
      throw config_error(line_no, "bad value for '" + key + "': " + e.what());
    }
  }

  static const std::set<std::string> experiments = {
      "noise-convergence", "robustness-sweep", "hjb-solve", "evaluate-cost", "validate",
      "lift"};
  if (!experiments.count(cfg.experiment))
    throw config_error(0, "unknown experiment '" + cfg.experiment + "'");
  if (cfg.criterion != "discounted" && cfg.criterion != "finite-horizon")
    throw config_error(0, "criterion must be 'discounted' or 'finite-horizon'");
  if (cfg.experiment == "validate" && cfg.validate_suites.empty())
    throw config_error(0, "empty validate suite selection");
  if (cfg.seeds == 0) throw config_error(0, "seeds must be >= 1");
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  return parse_config(f);
}

inline std::string ExperimentConfig::resolved_text() const {
  std::ostringstream os;
  auto list = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  os << "experiment = " << experiment << "\n";
  os << "model = " << model << "\n";
  os << "criterion = " << criterion << "\n";
  os << "noise.families = " << list(families) << "\n";
  os << "noise.levels =";
  for (std::size_t i = 0; i < levels.size(); ++i) os << (i ? "," : " ") << levels[i];
  os << "\n";
  os << "noise.dim = " << dim << "\n";
  os << "seeds = " << seeds << "\n";
  os << "seed0 = " << seed0 << "\n";
  os << "alpha.hoelder = " << alpha_hoelder << "\n";
  os << "noise.fine_factor = " << fine_factor << "\n";
  os << "noise.fine_cells = " << fine_cells << "\n";
  os << "noise.compare_cells = " << compare_cells << "\n";
  os << "noise.mid_cells = " << mid_cells << "\n";
  os << "quad_order = " << quad_order << "\n";
  os << "grid.nx = " << nx << "\n";
  os << "grid.nu = " << nu << "\n";
  os << "grid.nt = " << nt << "\n";
  os << "paths = " << paths << "\n";
  os << "cells_per_unit = " << cells_per_unit << "\n";
  os << "x0 = " << x0 << "\n";
  os << "horizon = " << horizon << "\n";
  os << "t_trunc_tol = " << t_trunc_tol << "\n";
  os << "mollify_bandwidth = " << mollify_bandwidth << "\n";
  os << "policy_file = " << (policy_file.empty() ? "<hjb-derived>" : policy_file) << "\n";
  os << "validate.suites = " << list(validate_suites) << "\n";
  os << "inject = " << inject << "\n";
  os << "out = " << out_dir << "\n";
  os << "threads = " << threads << "\n";
  return os.str();
}

}  // namespace rsde::xp
