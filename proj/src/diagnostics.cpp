#include "accsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "accsim/error.hpp"

namespace accsim {

namespace {

Oracle solve_quadratic(const ShiftedProblem& s) {
  const auto& avg = s.base->average_quadratic();
  const auto d = static_cast<Eigen::Index>(s.dim());
  Matrix H = avg.hessian + s.delta * Matrix::Identity(d, d);
  Vector rhs = avg.linear;
  if (s.delta > 0.0) rhs += s.delta * row_mean(s.centers);
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::DegenerateStrongConvexity, "average Hessian is not positive definite");
  Oracle o;
  o.x_star = llt.solve(rhs);
  o.u_star = s.objective(o.x_star);
  o.hessian = std::move(H);
  return o;
}

/// Accelerated proximal gradient (constant momentum from the strong-convexity
/// lower bound, with gradient-based restart).
Oracle solve_iterative(const ShiftedProblem& s, const SolveOptions& opts) {
  const auto& p = *s.base;
  double L = 0.0;
  for (std::size_t i = 0; i < p.agents(); ++i) L = std::max(L, p.agent_smoothness(i));
  L += s.delta;
  double mu = s.delta;
  if (!p.is_quadratic()) mu += p.lambda();
  else mu += std::max(0.0, symmetric_eigen_range(p.average_quadratic().hessian).min);
  const double step = 1.0 / L;
  const double q = mu > 0.0 ? std::sqrt(mu / L) : 0.0;
  const double momentum_strong = (1.0 - q) / (1.0 + q);

  const auto d = static_cast<Eigen::Index>(s.dim());
  Vector x = Vector::Zero(d), x_prev = x, v = x;
  double t_k = 1.0;
  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    const Vector g = s.average_grad(v);
    Vector next = prox_r(p, v - step * g, step);
    // Gradient mapping at v.
    const double mapping = (v - next).norm() / step;
    if (mapping <= opts.tol) {
      Oracle o;
      o.x_star = std::move(next);
      o.u_star = s.objective(o.x_star);
      o.iterations = it;
      return o;
    }
    double beta_k;
    if (mu > 0.0) {
      beta_k = momentum_strong;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
      beta_k = (t_k - 1.0) / t_next;
      t_k = t_next;
    }
    // Restart when the momentum direction opposes the gradient mapping.
    if ((v - next).dot(next - x) > 0.0) {
      beta_k = 0.0;
      t_k = 1.0;
    }
    x_prev = std::move(x);
    x = std::move(next);
    v = x + beta_k * (x - x_prev);
  }
  throw Error(ErrorKind::OracleNotConverged,
              "centralized solve did not reach tol " + std::to_string(opts.tol) + " in " +
                  std::to_string(opts.max_iters) + " iterations");
}

}  // namespace

Oracle centralized_solve(const ShiftedProblem& problem, const SolveOptions& opts) {
  const auto& p = *problem.base;
  if (p.is_quadratic() && p.regularizer().kind == Regularizer::Kind::Zero) return solve_quadratic(problem);
  return solve_iterative(problem, opts);
}

Oracle centralized_solve(const ProblemSpec& problem, const SolveOptions& opts) {
  return centralized_solve(ShiftedProblem::unshifted(problem), opts);
}

double objective_gap(const ShiftedProblem& problem, const Oracle& oracle, const Vector& x) {
  if (oracle.hessian) {
    const Vector e = x - oracle.x_star;
    return 0.5 * e.dot(*oracle.hessian * e);
  }
  return problem.objective(x) - oracle.u_star;
}

double average_objective_gap(const ShiftedProblem& problem, const Oracle& oracle, const Matrix& X) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) sum += objective_gap(problem, oracle, X.row(i).transpose());
  return sum / static_cast<double>(X.rows());
}

double optimality_gap(const ProblemSpec& problem, const Matrix& X, const Oracle& oracle) {
  const double value_gap = average_objective_gap(ShiftedProblem::unshifted(problem), oracle, X);
  return std::max(value_gap, consensus_error(X));
}

double admissible_rho(const Constants& c, SurrogateKind mode) {
  const double L = c.L_hat, b = c.beta_hat, mu = c.mu_hat;
  if (mode == SurrogateKind::F)
    return b * (2.0 * b - mu) / (4.0 * std::sqrt(1785.0) * (L + 2.0 * b - mu) * (L + 4.0 * b - mu));
  const double den = 2.0 * L - mu + b;
  return L * L / (70.0 * std::sqrt(15.0) * den * den);
}

PotentialConstants potential_constants(const Constants& c, SurrogateKind mode, double delta, double alpha,
                                       double c_seq) {
  const double L = c.L_hat, b = c.beta_hat, mu = c.mu_hat;
  PotentialConstants pc;
  if (mode == SurrogateKind::F) {
    pc.c_x = 8.0 * (L + 2.0 * b - mu) * (L + 2.0 * b - mu) / b;
    pc.c_y = 4.0 / b;
    pc.contraction = 33.0 / 34.0;
  } else {
    pc.c_x = 56.0 * (2.0 * L + b - mu) * (2.0 * L + b - mu) / L;
    pc.c_y = 28.0 / L;
    pc.contraction = 9.0 / 10.0;
  }
  pc.rho_bound = admissible_rho(c, mode);
  const double ca = c_seq * alpha;
  const double one_ca = 1.0 - ca;
  pc.c1 = 1.0 + (delta / pc.c_x) * (1.5 * one_ca * one_ca + 5.0 - 4.0 * ca) / (one_ca * one_ca);
  const double root = std::sqrt(one_ca / (1.0 - alpha)) - 1.0;
  const double s = 2.0 + std::sqrt(pc.c1);
  pc.c2 = s * s / (root * root * (1.0 - alpha));
  return pc;
}

InnerPotential inner_potential(const ShiftedProblem& shifted, const Matrix& X, const Matrix& Y,
                               const Oracle& oracle_k, const PotentialConstants& pc) {
  InnerPotential out;
  out.g = average_objective_gap(shifted, oracle_k, X);
  out.e = pc.c_x * consensus_error(X) + pc.c_y * consensus_error(Y);
  return out;
}

double outer_potential(const ProblemSpec& problem, const Matrix& X_prev, const Matrix& X, double alpha,
                       double mu, const Oracle& oracle, double e_prev) {
  const double value_gap = average_objective_gap(ShiftedProblem::unshifted(problem), oracle, X);
  double dist = 0.0;
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    const Vector v = X_prev.row(j).transpose() + (X.row(j) - X_prev.row(j)).transpose() / alpha;
    dist += (v - oracle.x_star).squaredNorm();
  }
  dist /= static_cast<double>(X.rows());
  return value_gap + 0.5 * mu * dist + e_prev;
}

double warm_start_bound(double P0, std::size_t k, double mu, double delta, double alpha, double c_seq,
                        const PotentialConstants& pc) {
  const double r = 1.0 - c_seq * alpha;
  const double kk = static_cast<double>(k);
  return P0 * (2.0 * std::pow(r, kk) +
               std::max(1.0 / (mu + delta), 2.0 * pc.c_y) * (72.0 * delta * delta / mu) * pc.c2 *
                   std::pow(r, kk - 1.0));
}

std::optional<std::size_t> comms_to_accuracy(const Trajectory& traj, double eps) {
  if (!(eps > 0.0)) return std::nullopt;
  for (const auto& rec : traj)
    if (rec.gap <= eps) return rec.comms;
  return std::nullopt;
}

}  // namespace accsim
