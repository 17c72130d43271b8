#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "accsim/diagnostics.hpp"
#include "accsim/network.hpp"
#include "accsim/sonata.hpp"

namespace accsim {

/// Inner-iteration rule. Standard: F uses ceil(ln(beta/mu)), L uses ceil(ln kappa).
/// Swapped: F uses ceil(1.4 ln(L/mu)), L uses ceil(ln(beta/mu)).
enum class TRule { Standard, Swapped };

const char* to_string(TRule rule) noexcept;
TRule t_rule_from_string(const std::string& name);

struct AccelParams {
  double delta = 0.0;
  double alpha = 1.0;   // sqrt(mu/(mu+delta))
  double mu = 0.0;      // strong-convexity value used for alpha and P^k
  std::size_t T = 1;
  SurrogateParams surrogate;
  double c_seq = 0.5;

  double extrapolation() const { return (1.0 - alpha) / (1.0 + alpha); }
};

/// Mode F: delta = beta - mu, surrogate weight beta. Mode L: delta = L - mu,
/// surrogate curvature L + delta. Throws degenerate-similarity when beta <= mu
/// (mode F) and perfectly-conditioned when kappa <= 1 (mode L).
AccelParams tune(const Constants& c, SurrogateKind mode, double c_seq = 0.5, TRule rule = TRule::Standard);

/// Parameters for given delta (may be 0) with alpha from the formula.
AccelParams make_params(const Constants& c, SurrogateKind mode, double delta, std::size_t T, double c_seq = 0.5);

std::size_t inner_iterations(const Constants& c, SurrogateKind mode, TRule rule);

struct InnerEvent {
  std::size_t k = 0;
  std::size_t t = 0;
  std::size_t comms = 0;
  const ShiftedProblem* shifted = nullptr;
  const AgentStates* states = nullptr;
};

struct AccelOptions {
  std::size_t K_max = 1000;
  std::optional<double> target_gap;  // stop after the outer iteration whose end gap is <= target
  bool potentials = false;           // record g+e and P^k (needs a shifted oracle per iteration)
  bool half_duplex = false;
  /// Start tracking from the average gradient instead of the local ones.
  bool average_initial_tracking = false;
  bool record_iterates = false;
  std::function<void(const InnerEvent&)> on_inner;
  /// Centralized oracle of the original problem; computed when absent.
  std::optional<Oracle> oracle;
  /// Constants for the potential weights; estimated when absent.
  std::optional<Constants> constants;
};

struct AccelResult {
  Trajectory trajectory;
  AgentStates final_states;
  std::size_t comms = 0;
  std::size_t outer_iterations = 0;
  bool reached_target = false;
  double max_tracking_residual = 0.0;
  Oracle oracle;
  std::vector<Matrix> x_history;          // x^0 .. x^K when record_iterates
  std::vector<double> warm_start_potential;  // g^{k,0} + e^{k,0} when potentials
  std::vector<double> outer_potentials;      // P^0 .. P^K when potentials
  std::size_t unconverged_subproblems = 0;
  std::size_t max_subproblem_iters = 0;
};

AccelResult acc_sonata_run(const ProblemSpec& p, const AccelParams& params, const GossipMatrix& W,
                           std::size_t K, const AccelOptions& opts = {});

/// Master/worker outer loop: x^0 = z^0 = 0, SONATA-star inner loop, common extrapolation.
struct StarAccelResult {
  std::vector<Vector> x_history;  // x^0 .. x^K
  std::size_t comms = 0;
};

StarAccelResult acc_sonata_star_run(const ProblemSpec& p, const AccelParams& params, std::size_t K);

}  // namespace accsim
