#include "accsim/accel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "accsim/error.hpp"

namespace accsim {

const char* to_string(TRule rule) noexcept { return rule == TRule::Standard ? "standard" : "swapped"; }

TRule t_rule_from_string(const std::string& name) {
  if (name == "standard") return TRule::Standard;
  if (name == "swapped") return TRule::Swapped;
  throw Error(ErrorKind::InvalidInput, "T rule must be 'standard' or 'swapped', got '" + name + "'");
}

namespace {

std::size_t ceil_log(double ratio, double factor = 1.0) {
  const double v = std::ceil(factor * std::log(ratio));
  return v < 1.0 ? 1 : static_cast<std::size_t>(v);
}

void validate_constants(const Constants& c) {
  if (!(c.mu_hat > 0.0) || !std::isfinite(c.L_hat) || !(c.beta_hat >= 0.0))
    throw Error(ErrorKind::InvalidInput, "constants must satisfy mu > 0, beta >= 0, L finite");
}

}  // namespace

std::size_t inner_iterations(const Constants& c, SurrogateKind mode, TRule rule) {
  if (rule == TRule::Standard)
    return mode == SurrogateKind::F ? ceil_log(c.beta_hat / c.mu_hat) : ceil_log(c.kappa_hat());
  return mode == SurrogateKind::F ? ceil_log(c.L_hat / c.mu_hat, 1.4) : ceil_log(c.beta_hat / c.mu_hat);
}

AccelParams make_params(const Constants& c, SurrogateKind mode, double delta, std::size_t T, double c_seq) {
  validate_constants(c);
  if (!(delta >= 0.0)) throw Error(ErrorKind::InvalidInput, "delta must be >= 0");
  if (!(c_seq > 0.0 && c_seq < 1.0)) throw Error(ErrorKind::InvalidInput, "c_seq must be in (0, 1)");
  AccelParams p;
  p.delta = delta;
  p.mu = c.mu_hat;
  p.alpha = std::sqrt(c.mu_hat / (c.mu_hat + delta));
  p.T = T;
  p.c_seq = c_seq;
  p.surrogate.kind = mode;
  p.surrogate.beta = c.beta_hat;
  p.surrogate.L_surr = c.L_hat + delta;
  return p;
}

AccelParams tune(const Constants& c, SurrogateKind mode, double c_seq, TRule rule) {
  validate_constants(c);
  if (mode == SurrogateKind::F && !(c.beta_hat > c.mu_hat))
    throw Error(ErrorKind::DegenerateSimilarity,
                "beta_hat <= mu_hat; run plain SONATA (delta = 0) instead");
  if (mode == SurrogateKind::L && !(c.kappa_hat() > 1.0))
    throw Error(ErrorKind::PerfectlyConditioned, "kappa_hat <= 1; the problem is already perfectly conditioned");
  const double delta = mode == SurrogateKind::F ? c.beta_hat - c.mu_hat : c.L_hat - c.mu_hat;
  return make_params(c, mode, delta, inner_iterations(c, mode, rule), c_seq);
}

namespace {

double tracking_residual(const AgentStates& s) {
  return (row_mean(s.y) - row_mean(s.grad)).lpNorm<Eigen::Infinity>();
}

}  // namespace

AccelResult acc_sonata_run(const ProblemSpec& p, const AccelParams& params, const GossipMatrix& W,
                           std::size_t K, const AccelOptions& opts) {
  const auto m = static_cast<Eigen::Index>(p.agents());
  const auto d = static_cast<Eigen::Index>(p.dim());
  if (W.W.rows() != m) throw Error(ErrorKind::InvalidInput, "gossip matrix size does not match m");
  if (!(params.alpha > 0.0 && params.alpha <= 1.0)) throw Error(ErrorKind::InvalidInput, "alpha must be in (0, 1]");

  AccelResult res;
  res.oracle = opts.oracle ? *opts.oracle : centralized_solve(p);
  std::optional<PotentialConstants> pc;
  if (opts.potentials) {
    const Constants c = opts.constants ? *opts.constants : estimate_constants(p);
    pc = potential_constants(c, params.surrogate.kind, params.delta, params.alpha, params.c_seq);
  }

  Matrix X = Matrix::Zero(m, d);
  Matrix Z = Matrix::Zero(m, d);
  Matrix Z_prev = Matrix::Zero(m, d);
  const auto base = ShiftedProblem::unshifted(p);
  Matrix Y = base.local_grads(X);
  if (opts.average_initial_tracking) Y.rowwise() = Y.colwise().mean();

  {
    TrajectoryRecord rec;
    rec.gap = optimality_gap(p, X, res.oracle);
    rec.consensus = consensus_error(X);
    rec.tracking = consensus_error(Y);
    rec.tracking_residual = (row_mean(Y) - row_mean(base.local_grads(X))).lpNorm<Eigen::Infinity>();
    if (pc) {
      rec.P_k = outer_potential(p, X, X, params.alpha, params.mu, res.oracle, 0.0);
      res.outer_potentials.push_back(rec.P_k);
    }
    res.trajectory.push_back(rec);
  }
  if (opts.record_iterates) res.x_history.push_back(X);
  if (opts.target_gap && res.trajectory.front().gap <= *opts.target_gap) {
    res.reached_target = true;
    res.final_states = initial_states(base, X);
    res.final_states.y = Y;
    return res;
  }

  const double extrap = params.extrapolation();
  for (std::size_t k = 0; k < K; ++k) {
    const auto shifted = ShiftedProblem::shifted(p, params.delta, Z);
    const Matrix Y_in = Y + params.delta * (Z_prev - Z);

    std::optional<Oracle> oracle_k;
    if (pc) {
      oracle_k = centralized_solve(shifted);
      res.warm_start_potential.push_back(inner_potential(shifted, X, Y_in, *oracle_k, *pc).sum());
    }
    {
      // Warm restart: mean(y_in) must equal mean(grad f^k(x)).
      AgentStates start;
      start.y = Y_in;
      start.grad = shifted.local_grads(X);
      res.max_tracking_residual = std::max(res.max_tracking_residual, tracking_residual(start));
    }

    double last_e = 0.0;
    SonataOptions so;
    so.half_duplex = opts.half_duplex;
    so.observer = [&](std::size_t t, const AgentStates& s, std::size_t comms) {
      TrajectoryRecord rec;
      rec.k = k;
      rec.t = t;
      rec.comms = res.comms + comms;
      rec.gap = optimality_gap(p, s.x, res.oracle);
      rec.consensus = consensus_error(s.x);
      rec.tracking = consensus_error(s.y);
      rec.tracking_residual = tracking_residual(s);
      res.max_tracking_residual = std::max(res.max_tracking_residual, rec.tracking_residual);
      if (pc) {
        const auto ip = inner_potential(shifted, s.x, s.y, *oracle_k, *pc);
        rec.g_plus_e = ip.sum();
        last_e = ip.e;
      }
      res.trajectory.push_back(rec);
      if (opts.on_inner) opts.on_inner(InnerEvent{k, t, rec.comms, &shifted, &s});
    };
    auto inner = sonata_run(shifted, X, Y_in, params.T, W, params.surrogate, so);
    res.comms += inner.comms;
    res.unconverged_subproblems += inner.unconverged_subproblems;
    res.max_subproblem_iters = std::max(res.max_subproblem_iters, inner.max_subproblem_iters);
    if (!res.trajectory.empty()) res.trajectory.back().unconverged_subproblems = inner.unconverged_subproblems;

    const Matrix X_old = X;
    X = inner.states.x;
    Y = inner.states.y;
    Z_prev = Z;
    Z = X + extrap * (X - X_old);
    res.final_states = std::move(inner.states);
    res.outer_iterations = k + 1;
    if (opts.record_iterates) res.x_history.push_back(X);
    if (pc) {
      // P^{k+1} carries e^{k,T}, the inner potential's error term at the end of this loop.
      const double P = outer_potential(p, X_old, X, params.alpha, params.mu, res.oracle, last_e);
      res.outer_potentials.push_back(P);
      if (params.T > 0) res.trajectory.back().P_k = P;
    }
    const double end_gap = params.T > 0 ? res.trajectory.back().gap : optimality_gap(p, X, res.oracle);
    if (opts.target_gap && end_gap <= *opts.target_gap) {
      res.reached_target = true;
      break;
    }
  }
  return res;
}

StarAccelResult acc_sonata_star_run(const ProblemSpec& p, const AccelParams& params, std::size_t K) {
  const auto m = static_cast<Eigen::Index>(p.agents());
  const auto d = static_cast<Eigen::Index>(p.dim());
  StarAccelResult res;
  Vector x = Vector::Zero(d), z = Vector::Zero(d);
  res.x_history.push_back(x);
  const double extrap = params.extrapolation();
  for (std::size_t k = 0; k < K; ++k) {
    Matrix centers = z.transpose().replicate(m, 1);
    const auto shifted = ShiftedProblem::shifted(p, params.delta, std::move(centers));
    auto inner = sonata_star_run(shifted, x, params.T, params.surrogate);
    res.comms += inner.comms;
    const Vector x_old = x;
    x = inner.x;
    z = x + extrap * (x - x_old);
    res.x_history.push_back(x);
  }
  return res;
}

}  // namespace accsim
