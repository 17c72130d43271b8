#include "accsim/sonata.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "accsim/error.hpp"

namespace accsim {

ShiftedProblem ShiftedProblem::unshifted(const ProblemSpec& p) {
  ShiftedProblem s;
  s.base = &p;
  return s;
}

ShiftedProblem ShiftedProblem::shifted(const ProblemSpec& p, double delta, Matrix centers) {
  if (!(delta >= 0.0)) throw Error(ErrorKind::InvalidInput, "delta must be >= 0");
  if (centers.rows() != static_cast<Eigen::Index>(p.agents()) ||
      centers.cols() != static_cast<Eigen::Index>(p.dim()))
    throw Error(ErrorKind::InvalidInput, "centers must be m x d");
  ShiftedProblem s;
  s.base = &p;
  s.delta = delta;
  s.centers = std::move(centers);
  return s;
}

double ShiftedProblem::local_value(std::size_t i, const Vector& x) const {
  double v = accsim::local_value(*base, i, x);
  if (delta > 0.0) v += 0.5 * delta * (x - centers.row(static_cast<Eigen::Index>(i)).transpose()).squaredNorm();
  return v;
}

Vector ShiftedProblem::local_grad(std::size_t i, const Vector& x) const {
  Vector g = accsim::local_grad(*base, i, x);
  if (delta > 0.0) g += delta * (x - centers.row(static_cast<Eigen::Index>(i)).transpose());
  return g;
}

Matrix ShiftedProblem::local_grads(const Matrix& X) const {
  Matrix G(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    G.row(i) = local_grad(static_cast<std::size_t>(i), X.row(i).transpose()).transpose();
  return G;
}

double ShiftedProblem::objective(const Vector& x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < agents(); ++i) v += local_value(i, x);
  return v / static_cast<double>(agents()) + base->regularizer().value(x);
}

Vector ShiftedProblem::average_grad(const Vector& x) const {
  Vector g = accsim::average_grad(*base, x);
  if (delta > 0.0) g += delta * (x - row_mean(centers));
  return g;
}

const char* to_string(SurrogateKind kind) noexcept { return kind == SurrogateKind::F ? "F" : "L"; }

SurrogateKind surrogate_kind_from_string(const std::string& name) {
  if (name == "F" || name == "f") return SurrogateKind::F;
  if (name == "L" || name == "l") return SurrogateKind::L;
  throw Error(ErrorKind::InvalidInput, "surrogate kind must be F or L, got '" + name + "'");
}

LocalSolver::LocalSolver(const ShiftedProblem& problem, const SurrogateParams& params)
    : problem_(&problem), params_(params) {
  if (params.kind == SurrogateKind::F && !(params.beta >= 0.0))
    throw Error(ErrorKind::InvalidInput, "F surrogate requires beta >= 0");
  if (params.kind == SurrogateKind::L && !(params.L_surr > 0.0))
    throw Error(ErrorKind::InvalidInput, "L surrogate requires L_surr > 0");
  const auto& p = *problem.base;
  if (params.kind == SurrogateKind::F && p.is_quadratic() &&
      p.regularizer().kind == Regularizer::Kind::Zero) {
    const auto d = static_cast<Eigen::Index>(p.dim());
    const double shift = problem.delta + params.beta;
    factors_.reserve(p.agents());
    for (std::size_t i = 0; i < p.agents(); ++i) {
      factors_.emplace_back(p.quadratic(i).hessian + shift * Matrix::Identity(d, d));
      if (factors_.back().info() != Eigen::Success)
        throw Error(ErrorKind::InvalidInput, "local subproblem is not positive definite");
    }
  }
}

SubproblemResult LocalSolver::solve(std::size_t i, const Vector& x_i, const Vector& y_i,
                                    const Vector& grad_i) const {
  const auto& p = *problem_->base;
  SubproblemResult out;
  if (params_.kind == SurrogateKind::L) {
    // The linearization and the correction add up to <y_i, x - x_i>.
    out.x = prox_r(p, x_i - y_i / params_.L_surr, 1.0 / params_.L_surr);
    return out;
  }
  if (!factors_.empty()) {
    // Stationarity: (H_i + (delta+beta) I)(x - x_i) = -(y_i - grad_i) - grad f_i^k(x_i);
    // grad_i equals grad f_i^k(x_i), leaving -y_i on the right.
    out.x = x_i - factors_[i].solve(y_i + (problem_->local_grad(i, x_i) - grad_i));
    return out;
  }
  // Proximal gradient on f_i^k(x) + (beta/2)||x - x_i||^2 + <y_i - grad_i, x> + r(x).
  const double smooth = p.agent_smoothness(i) + problem_->delta + params_.beta;
  const double step = 1.0 / smooth;
  const Vector correction = y_i - grad_i;
  Vector x = x_i;
  for (std::size_t it = 1; it <= params_.max_inner_iters; ++it) {
    const Vector g = problem_->local_grad(i, x) + params_.beta * (x - x_i) + correction;
    Vector next = prox_r(p, x - step * g, step);
    const double move = (next - x).norm() / step;
    x = std::move(next);
    out.iterations = it;
    if (move <= params_.subproblem_tol) {
      out.x = std::move(x);
      return out;
    }
  }
  out.x = std::move(x);
  out.converged = false;
  return out;
}

std::size_t gossip_round(const ShiftedProblem& problem, AgentStates& states, const Matrix& x_half,
                         const GossipMatrix& W, bool half_duplex) {
  states.x.noalias() = W.W * x_half;
  Matrix fresh = problem.local_grads(states.x);
  states.y = W.W * (states.y + fresh - states.grad);
  states.grad = std::move(fresh);
  return W.rounds_per_application * (half_duplex ? 2 : 1);
}

AgentStates initial_states(const ShiftedProblem& problem, const Matrix& x0) {
  AgentStates s;
  s.x = x0;
  s.grad = problem.local_grads(x0);
  s.y = s.grad;
  return s;
}

SonataResult sonata_run(const ShiftedProblem& problem, const Matrix& x0, const Matrix& y0, std::size_t T,
                        const GossipMatrix& W, const SurrogateParams& params, const SonataOptions& opts) {
  const auto m = static_cast<Eigen::Index>(problem.agents());
  const auto d = static_cast<Eigen::Index>(problem.dim());
  if (x0.rows() != m || x0.cols() != d || y0.rows() != m || y0.cols() != d)
    throw Error(ErrorKind::InvalidInput, "x0 and y0 must be m x d");
  if (W.W.rows() != m) throw Error(ErrorKind::InvalidInput, "gossip matrix size does not match m");

  SonataResult res;
  res.states.x = x0;
  res.states.y = y0;
  res.states.grad = problem.local_grads(x0);
  if (T == 0) return res;

  const LocalSolver solver(problem, params);
  Matrix x_half(m, d);
  for (std::size_t t = 1; t <= T; ++t) {
    for (Eigen::Index i = 0; i < m; ++i) {
      auto sub = solver.solve(static_cast<std::size_t>(i), res.states.x.row(i).transpose(),
                              res.states.y.row(i).transpose(), res.states.grad.row(i).transpose());
      if (!sub.converged) ++res.unconverged_subproblems;
      res.max_subproblem_iters = std::max(res.max_subproblem_iters, sub.iterations);
      x_half.row(i) = sub.x.transpose();
    }
    res.comms += gossip_round(problem, res.states, x_half, W, opts.half_duplex);
    if (opts.observer) opts.observer(t, res.states, res.comms);
  }
  return res;
}

StarResult sonata_star_run(const ShiftedProblem& problem, const Vector& x0, std::size_t T,
                           const SurrogateParams& params,
                           const std::function<void(std::size_t, const Vector&, std::size_t)>& observer) {
  const auto m = problem.agents();
  const LocalSolver solver(problem, params);
  StarResult res;
  res.x = x0;
  for (std::size_t t = 1; t <= T; ++t) {
    // Workers report grad f_i^k(x); the master broadcasts the average.
    std::vector<Vector> local(m);
    Vector avg = Vector::Zero(x0.size());
    for (std::size_t i = 0; i < m; ++i) {
      local[i] = problem.local_grad(i, res.x);
      avg += local[i];
    }
    avg /= static_cast<double>(m);
    Vector next = Vector::Zero(x0.size());
    for (std::size_t i = 0; i < m; ++i) {
      auto sub = solver.solve(i, res.x, avg, local[i]);
      if (!sub.converged) ++res.unconverged_subproblems;
      next += sub.x;
    }
    res.x = next / static_cast<double>(m);
    res.comms += 1;
    if (observer) observer(t, res.x, res.comms);
  }
  return res;
}

}  // namespace accsim
