#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "accsim/problems.hpp"
#include "accsim/sonata.hpp"

namespace accsim {

/// Centralized minimizer and optimal value of a (possibly shifted) problem.
struct Oracle {
  Vector x_star;
  double u_star = 0.0;
  /// Hessian of the averaged objective when it is quadratic with r = 0; lets
  /// gaps be evaluated as 0.5 (x - x*)' H (x - x*) without cancellation.
  std::optional<Matrix> hessian;
  std::size_t iterations = 0;
};

struct SolveOptions {
  double tol = 1e-12;
  std::size_t max_iters = 2000000;
};

/// Quadratic with r = 0: Cholesky solve. Otherwise accelerated proximal
/// gradient with restarts until the gradient-mapping norm is <= tol.
Oracle centralized_solve(const ShiftedProblem& problem, const SolveOptions& opts = {});
Oracle centralized_solve(const ProblemSpec& problem, const SolveOptions& opts = {});

/// u(x) - u* for one point.
double objective_gap(const ShiftedProblem& problem, const Oracle& oracle, const Vector& x);

/// (1/m) sum_i (u(x_i) - u*) over the rows of X.
double average_objective_gap(const ShiftedProblem& problem, const Oracle& oracle, const Matrix& X);

/// max{(1/m) sum_i u(x_i) - u*, (1/m) sum_i ||x_i - x_bar||^2}.
double optimality_gap(const ProblemSpec& problem, const Matrix& X, const Oracle& oracle);

/// Weights and rates of the inner/outer potential functions.
struct PotentialConstants {
  double c_x = 0.0;
  double c_y = 0.0;
  double contraction = 0.0;  // 33/34 (F) or 9/10 (L)
  double rho_bound = 0.0;    // admissible rho for the contraction
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Closed-form admissible rho: F uses beta(2beta-mu)/(4 sqrt(1785)(L+2beta-mu)(L+4beta-mu)),
/// L uses L^2/(70 sqrt(15)(2L-mu+beta)^2).
double admissible_rho(const Constants& c, SurrogateKind mode);

/// Constants for the given mode; c1 and c2 additionally need delta, alpha and c_seq.
PotentialConstants potential_constants(const Constants& c, SurrogateKind mode, double delta, double alpha,
                                       double c_seq);

struct InnerPotential {
  double g = 0.0;
  double e = 0.0;
  double sum() const { return g + e; }
};

/// g = (1/m) sum_i (u_k(x_i) - u_k*), e = c_x ||x_perp||^2 + c_y ||y_perp||^2.
InnerPotential inner_potential(const ShiftedProblem& shifted, const Matrix& X, const Matrix& Y,
                               const Oracle& oracle_k, const PotentialConstants& pc);

/// P^k = (1/m) sum (u(x_j^k) - u*) + (1/m) sum (mu/2)||x_j^{k-1} + (x_j^k - x_j^{k-1})/alpha - x*||^2 + e_prev.
double outer_potential(const ProblemSpec& problem, const Matrix& X_prev, const Matrix& X, double alpha,
                       double mu, const Oracle& oracle, double e_prev);

/// Upper bound on g^{k,0} + e^{k,0} at the warm start of outer iteration k:
/// P0 (2(1-c alpha)^k + max(1/(mu+delta), 2 c_y) (72 delta^2/mu) c2 (1-c alpha)^{k-1}).
double warm_start_bound(double P0, std::size_t k, double mu, double delta, double alpha, double c_seq,
                        const PotentialConstants& pc);

inline constexpr double kNotRecorded = std::numeric_limits<double>::quiet_NaN();

struct TrajectoryRecord {
  std::size_t k = 0;       // outer iteration
  std::size_t t = 0;       // inner iteration (0 only for the initial record)
  std::size_t comms = 0;   // cumulative communication rounds
  double gap = 0.0;        // Delta
  double consensus = 0.0;  // ||x_perp||^2
  double tracking = 0.0;   // ||y_perp||^2
  double g_plus_e = kNotRecorded;
  double P_k = kNotRecorded;
  double tracking_residual = 0.0;  // ||mean(y) - mean(grad f^k(x))||_inf
  std::size_t unconverged_subproblems = 0;
};

using Trajectory = std::vector<TrajectoryRecord>;

/// First cumulative comms value whose gap is <= eps; never reached for eps <= 0.
std::optional<std::size_t> comms_to_accuracy(const Trajectory& traj, double eps);

}  // namespace accsim
