#pragma once

#include <functional>
#include <vector>

#include <Eigen/Cholesky>

#include "accsim/network.hpp"
#include "accsim/problems.hpp"

namespace accsim {

/// The outer-loop problem u_k: f_i^k(x) = f_i(x) + (delta/2) ||x - z_i||^2.
/// With delta = 0 this is the original problem.
struct ShiftedProblem {
  const ProblemSpec* base = nullptr;
  double delta = 0.0;
  Matrix centers;  // m x d, row i is z_i; may be empty when delta = 0

  static ShiftedProblem unshifted(const ProblemSpec& p);
  static ShiftedProblem shifted(const ProblemSpec& p, double delta, Matrix centers);

  std::size_t agents() const { return base->agents(); }
  std::size_t dim() const { return base->dim(); }

  double local_value(std::size_t i, const Vector& x) const;
  Vector local_grad(std::size_t i, const Vector& x) const;
  /// Row i of the result is grad f_i^k(row i of X).
  Matrix local_grads(const Matrix& X) const;
  /// u_k(x) = (1/m) sum_i f_i^k(x) + r(x).
  double objective(const Vector& x) const;
  /// (1/m) sum_i grad f_i^k(x).
  Vector average_grad(const Vector& x) const;
};

enum class SurrogateKind { F, L };

const char* to_string(SurrogateKind kind) noexcept;
SurrogateKind surrogate_kind_from_string(const std::string& name);

struct SurrogateParams {
  SurrogateKind kind = SurrogateKind::F;
  double beta = 0.0;        // proximal weight of the F surrogate
  double L_surr = 0.0;      // curvature of the L surrogate (L_hat + delta)
  double subproblem_tol = 1e-10;
  std::size_t max_inner_iters = 200000;
};

/// Per-agent variables stored as m x d matrices (one row per agent).
struct AgentStates {
  Matrix x;
  Matrix y;
  Matrix grad;  // grad f_i^k at the current x_i, as used by tracking

  std::size_t agents() const { return static_cast<std::size_t>(x.rows()); }
};

struct SubproblemResult {
  Vector x;
  std::size_t iterations = 0;  // 0 for closed-form solves
  bool converged = true;
};

/// Solves (S.1) for every agent of one shifted problem. Quadratic problems with
/// r = 0 under the F surrogate use cached Cholesky factors of H_i + (delta+beta)I;
/// the L surrogate is a single proximal step; everything else runs proximal
/// gradient with step 1/(L_i + delta + beta).
class LocalSolver {
 public:
  LocalSolver(const ShiftedProblem& problem, const SurrogateParams& params);

  SubproblemResult solve(std::size_t i, const Vector& x_i, const Vector& y_i, const Vector& grad_i) const;

 private:
  const ShiftedProblem* problem_;
  SurrogateParams params_;
  std::vector<Eigen::LLT<Matrix>> factors_;
};

/// (S.2): x <- W x_half, y <- W (y + grad(x) - grad_old). Returns the number of
/// communication rounds spent (rounds_per_application, doubled when half_duplex).
std::size_t gossip_round(const ShiftedProblem& problem, AgentStates& states, const Matrix& x_half,
                         const GossipMatrix& W, bool half_duplex = false);

struct SonataOptions {
  bool half_duplex = false;
  /// Called after every iteration t = 1..T with the states and the rounds spent so far.
  std::function<void(std::size_t t, const AgentStates&, std::size_t comms)> observer;
};

struct SonataResult {
  AgentStates states;
  std::size_t comms = 0;
  std::size_t unconverged_subproblems = 0;
  std::size_t max_subproblem_iters = 0;
};

/// Tracking initialization y_i = grad f_i^k(x_i) for standalone runs.
AgentStates initial_states(const ShiftedProblem& problem, const Matrix& x0);

/// T iterations of (S.1) + (S.2) starting from (x0, y0). grad is recomputed
/// from x0 for the shifted problem, so callers only supply x and y.
SonataResult sonata_run(const ShiftedProblem& problem, const Matrix& x0, const Matrix& y0, std::size_t T,
                        const GossipMatrix& W, const SurrogateParams& params, const SonataOptions& opts = {});

/// Master/worker variant: every worker starts from the common point x, receives
/// the exact average gradient, solves (S.1) and the master averages the results.
/// One iteration counts as one communication round.
struct StarResult {
  Vector x;
  std::size_t comms = 0;
  std::size_t unconverged_subproblems = 0;
};

StarResult sonata_star_run(const ShiftedProblem& problem, const Vector& x0, std::size_t T,
                           const SurrogateParams& params,
                           const std::function<void(std::size_t, const Vector&, std::size_t)>& observer = {});

}  // namespace accsim
