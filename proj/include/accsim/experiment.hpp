#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "accsim/accel.hpp"
#include "accsim/datagen.hpp"
#include "accsim/network.hpp"

namespace accsim {

struct ProblemConfig {
  enum class Source { Synthetic, Libsvm };
  Source source = Source::Synthetic;
  SyntheticRidgeConfig synthetic;
  std::string libsvm_path;
  LibsvmOptions libsvm;
  Regularizer reg;
};

struct TopologyConfig {
  std::string kind = "erdos_renyi";  // erdos_renyi | line | star | complete | exact_average
  std::size_t m = 0;                  // filled from the problem when 0
  double p = 0.5;
  std::optional<double> target_rho;   // Chebyshev-accelerate down to this rho
  bool half_duplex = false;
};

struct AlgorithmConfig {
  SurrogateKind mode = SurrogateKind::F;
  std::optional<double> delta;
  std::optional<double> alpha;
  std::optional<std::size_t> T;
  std::optional<std::size_t> K;       // exact outer iterations; otherwise run to target or K_max
  std::size_t K_max = 1000;
  double c_seq = 0.5;
  double target_gap = 1e-4;
  TRule t_rule = TRule::Standard;
  std::optional<double> mu;           // overrides mu_hat
  bool average_initial_tracking = false;
};

struct ExperimentConfig {
  ProblemConfig problem;
  TopologyConfig topology;
  AlgorithmConfig algorithm;
  bool potentials = false;
  std::string output_dir = ".";
  std::string output_prefix = "run";
  std::uint64_t seed = 0;
};

/// Parses a JSON document; unknown keys and type mismatches raise config-error
/// naming the JSON path of the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Output directory after applying the override chain: explicit flag, then the
/// ACCSIM_OUTPUT_DIR environment variable, then the config file.
std::string resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& flag);

ProblemSpec build_problem(const ProblemConfig& cfg, std::uint64_t seed);
GossipMatrix build_gossip(const TopologyConfig& cfg, std::size_t m, std::uint64_t seed);

/// Parameters after tuning and config overrides.
AccelParams resolve_params(const AlgorithmConfig& cfg, Constants constants);

struct RunOutput {
  AccelResult result;
  AccelParams params;
  Constants constants;
  GossipMatrix gossip;
  nlohmann::json metadata;
};

/// Runs one configuration in memory.
RunOutput run_experiment(const ExperimentConfig& cfg);

/// Trajectory CSV, schema trajectory/v1.
std::string trajectory_csv(const Trajectory& traj, bool potentials);

/// Runs and writes <dir>/<prefix>.csv and <dir>/<prefix>.meta.json; returns the CSV path.
std::string run_to_files(const ExperimentConfig& cfg, const std::string& output_dir);

enum class SweepAxis { Samples, BetaOverMu, Kappa };

const char* to_string(SweepAxis axis) noexcept;
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepOptions {
  SweepAxis axis = SweepAxis::Samples;
  /// samples: n values; beta_over_mu: target beta_hat/mu_hat; kappa: lambda values.
  std::vector<double> points;
  /// kappa axis: beta_hat/mu_hat held fixed by adjusting n.
  double hold_beta_over_mu = 10.0;
  std::size_t n_min = 20;
  std::size_t n_max = 200000;
  std::vector<std::string> variants = {"F", "L"};
  double eps = 1e-4;
};

struct SweepRow {
  double axis_value = 0.0;
  std::size_t n = 0;
  double lambda = 0.0;
  double beta_over_mu = 0.0;
  double kappa = 0.0;
  std::vector<std::optional<std::size_t>> comms;  // one per variant
  std::vector<std::size_t> T;                     // inner iterations per variant
};

/// Sweep of a synthetic configuration. Population covariance and x_true are
/// shared by all points (same seed); topology is built once.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const SweepOptions& opts);
std::string sweep_csv(const std::vector<SweepRow>& rows, const SweepOptions& opts);

/// Smallest-error n (searched on a log grid plus bisection) whose measured
/// beta_hat/mu_hat is closest to `target` for the given synthetic config.
std::size_t samples_for_beta_over_mu(SyntheticRidgeConfig cfg, double target, std::size_t n_min,
                                     std::size_t n_max);

struct LowerBoundOptions {
  double mu = 0.01;
  double beta = 0.5;
  double rho_target = 0.9;
  std::size_t d = 40;
  std::size_t rounds = 50;
  std::size_t max_m = 10000;
  double target_gap = 1e-4;
};

struct SupportSample {
  std::size_t comms = 0;
  std::size_t max_index = 0;  // largest 1-based nonzero coordinate over left agents' x, y, z
  std::size_t bound = 0;      // 1 + floor(comms/d_c) + 1
};

struct LowerBoundReport {
  double rho_target = 0.0;
  double rho_achieved = 0.0;
  std::size_t nodes = 0;
  std::size_t m_index = 0;
  double a = 0.0;
  std::size_t cut_distance = 0;
  double cut_bound = 0.0;  // (4/25) sqrt(1/(1-rho))
  bool cut_bound_holds = true;
  std::size_t T = 0;
  std::size_t K = 0;
  std::vector<SupportSample> support;
  bool support_invariant_holds = true;
  std::optional<std::size_t> comms_to_target;
  double final_gap = 0.0;

  nlohmann::json to_json() const;
};

/// Builds the line-graph gossip matrix and the hard instance, runs ACC-SONATA-F
/// with two rounds per iteration (x then y exchange), and checks support growth.
LowerBoundReport lowerbound_check(const LowerBoundOptions& opts);

/// Pretty JSON of the estimated constants.
nlohmann::json constants_to_json(const Constants& c);

}  // namespace accsim
