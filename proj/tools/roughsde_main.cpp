// Command-line front end: composes the library modules into reproducible
// experiments driven by a key=value config file.
//
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 validation failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "rsde/config.hpp"
#include "rsde/experiment.hpp"
#include "rsde/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitValidation = 4;

struct CliArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t threads = 0;
  bool threads_set = false;
};

rsde::xp::ExperimentConfig load_config(const CliArgs& args, const std::string& experiment) {
  rsde::xp::ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = rsde::xp::parse_config_file(args.config_path);
  cfg.experiment = experiment;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed_set) cfg.seed0 = args.seed;
  if (args.threads_set) cfg.threads = args.threads;
  return cfg;
}

int dispatch(const CliArgs& args, const std::string& experiment) {
  rsde::xp::ExperimentConfig cfg;
  try {
    cfg = load_config(args, experiment);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (experiment == "validate") {
      const auto report = rsde::xp::run_validate(cfg);
      for (const auto& suite : report.suites) {
        std::printf("suite %-8s %s\n", suite.name.c_str(),
                    suite.passed() ? "pass" : "FAIL");
        for (const auto& c : suite.checks)
          if (!c.passed)
            std::printf("  check %s FAILED: %s\n", c.name.c_str(), c.detail.c_str());
      }
      if (!cfg.out_dir.empty()) {
        rsde::xp::detail::echo_config(cfg);
        rsde::xp::detail::write_text_file(
            std::filesystem::path(cfg.out_dir) / "validate_report.json", report.to_json());
      } else {
        std::cout << report.to_json() << "\n";
      }
      std::printf("%s\n", report.ok() ? "all suites passed" : "validation failed");
      return report.ok() ? kExitOk : kExitValidation;
    }
    if (experiment == "noise-convergence") {
      const auto res = rsde::xp::run_noise_convergence(cfg);
      if (cfg.out_dir.empty()) std::cout << res.csv();
      std::fprintf(stderr, "noise-convergence: %zu rows\n", res.rows.size());
      return kExitOk;
    }
    if (experiment == "robustness") {
      const auto res = rsde::xp::run_robustness_sweep(cfg);
      if (cfg.out_dir.empty()) std::cout << res.csv();
      std::fprintf(stderr, "robustness: %zu rows, policy Lipschitz %.4g\n", res.rows.size(),
                   res.policy_lipschitz);
      return kExitOk;
    }
    if (experiment == "hjb") {
      const std::string policy_text = rsde::xp::run_hjb_solve(cfg);
      if (cfg.out_dir.empty()) std::cout << policy_text;
      return kExitOk;
    }
    if (experiment == "evaluate") {
      const auto est = rsde::xp::run_evaluate_cost(cfg);
      std::cout << est.to_json() << "\n";
      return kExitOk;
    }
    if (experiment == "lift") {
      const std::string text = rsde::xp::run_lift(cfg);
      if (cfg.out_dir.empty()) std::cout << text;
      return kExitOk;
    }
  } catch (const rsde::xp::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  std::cerr << "config error: unknown subcommand " << experiment << "\n";
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rough-path noise robustness laboratory"};
  app.require_subcommand(1);

  CliArgs args;
  app.add_option("--config", args.config_path, "experiment config file (key = value)");
  app.add_option("--out", args.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", args.seed, "override base seed");
  auto* thr_opt = app.add_option("--threads", args.threads, "worker threads (0 = hardware)");

  const char* subs[] = {"validate", "lift", "hjb", "evaluate", "noise-convergence",
                        "robustness"};
  const char* descs[] = {"run the module invariant suites",
                         "build one coupled lift and print/serialize it",
                         "solve the configured optimality equation, export value and policy",
                         "Monte-Carlo cost of a policy under one noise spec",
                         "rough-topology convergence sweep over noise families",
                         "near-optimal policy robustness sweep with common random numbers"};
  for (std::size_t i = 0; i < 6; ++i) app.add_subcommand(subs[i], descs[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  args.seed_set = seed_opt->count() > 0;
  args.threads_set = thr_opt->count() > 0;

  for (const char* name : subs)
    if (app.got_subcommand(name)) return dispatch(args, name);
  return kExitConfig;
}
