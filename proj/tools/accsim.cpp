// Command-line front end: run, sweep, lowerbound-check, estimate-constants.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "accsim/error.hpp"
#include "accsim/experiment.hpp"

namespace {

void apply_overrides(accsim::ExperimentConfig& cfg, const std::optional<std::uint64_t>& seed,
                     const std::optional<std::string>& mode, const std::optional<std::size_t>& K_max,
                     const std::optional<double>& target_gap, bool potentials) {
  if (seed) cfg.seed = *seed;
  if (mode) cfg.algorithm.mode = accsim::surrogate_kind_from_string(*mode);
  if (K_max) cfg.algorithm.K_max = *K_max;
  if (target_gap) cfg.algorithm.target_gap = *target_gap;
  if (potentials) cfg.potentials = true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized optimization simulator (SONATA inner loop, accelerated outer loop)"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::size_t> K_max;
  std::optional<double> target_gap;
  bool potentials = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output-dir", out_dir, "Output directory (overrides ACCSIM_OUTPUT_DIR and the config)");
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--mode", mode, "Override the surrogate mode (F or L)");
    sub->add_option("--K-max", K_max, "Override the outer-iteration cap");
    sub->add_option("--target-gap", target_gap, "Override the stopping gap");
  };

  auto* run = app.add_subcommand("run", "Run one experiment and write the trajectory CSV plus metadata JSON");
  add_common(run);
  run->add_flag("--potentials", potentials, "Record the inner and outer potentials");

  auto* sweep = app.add_subcommand("sweep", "Sweep samples, beta/mu or kappa and write a summary CSV");
  add_common(sweep);
  std::string axis = "samples";
  std::vector<double> points;
  std::vector<std::string> variants{"F", "L"};
  double hold = 10.0;
  sweep->add_option("--axis", axis, "samples | beta_over_mu | kappa")
      ->check(CLI::IsMember({"samples", "beta_over_mu", "kappa"}));
  sweep->add_option("--points", points, "Axis points (n values, beta/mu targets, or lambda values)")->required();
  sweep->add_option("--variants", variants, "Algorithm variants: F, L, sonata-F, sonata-L");
  sweep->add_option("--hold-beta-over-mu", hold, "beta/mu held fixed along the kappa axis");

  auto* lb = app.add_subcommand("lowerbound-check", "Build the lower-bound fixture and check support propagation");
  accsim::LowerBoundOptions lbo;
  lb->add_option("--mu", lbo.mu, "Strong convexity in [0, 1)");
  lb->add_option("--beta", lbo.beta, "Similarity in (0, 1)");
  lb->add_option("--rho", lbo.rho_target, "Target rho in (0, 1)");
  lb->add_option("--d", lbo.d, "Even dimension >= 4");
  lb->add_option("--rounds", lbo.rounds, "Communication rounds to instrument");
  lb->add_option("--max-m", lbo.max_m, "Largest allowed line graph");

  auto* est = app.add_subcommand("estimate-constants", "Print the estimated mu, L, L_mx and beta as JSON");
  std::string est_config;
  std::optional<std::uint64_t> est_seed;
  est->add_option("config", est_config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  est->add_option("--seed", est_seed, "Override the config seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto cfg = accsim::load_config(config_path);
      apply_overrides(cfg, seed, mode, K_max, target_gap, potentials);
      const auto dir = accsim::resolve_output_dir(cfg, out_dir);
      std::cout << accsim::run_to_files(cfg, dir) << '\n';
    } else if (sweep->parsed()) {
      auto cfg = accsim::load_config(config_path);
      apply_overrides(cfg, seed, mode, K_max, target_gap, false);
      accsim::SweepOptions so;
      so.axis = accsim::sweep_axis_from_string(axis);
      so.points = points;
      so.variants = variants;
      so.hold_beta_over_mu = hold;
      so.eps = cfg.algorithm.target_gap;
      const auto rows = accsim::run_sweep(cfg, so);
      const auto dir = accsim::resolve_output_dir(cfg, out_dir);
      std::filesystem::create_directories(dir);
      const auto path = std::filesystem::path(dir) / (cfg.output_prefix + ".sweep.csv");
      std::ofstream(path, std::ios::binary) << accsim::sweep_csv(rows, so);
      std::cout << path.string() << '\n';
    } else if (lb->parsed()) {
      const auto rep = accsim::lowerbound_check(lbo);
      std::cout << rep.to_json().dump(2) << '\n';
      if (!rep.support_invariant_holds || !rep.cut_bound_holds) return 2;
    } else if (est->parsed()) {
      auto cfg = accsim::load_config(est_config);
      if (est_seed) cfg.seed = *est_seed;
      const auto problem = accsim::build_problem(cfg.problem, cfg.seed);
      std::cout << accsim::constants_to_json(accsim::estimate_constants(problem)).dump(2) << '\n';
    }
  } catch (const accsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
