#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "accsim/linalg.hpp"

namespace accsim {

enum class LossKind { QuadraticRidge, SmoothHinge, Logistic };

const char* to_string(LossKind kind) noexcept;
LossKind loss_kind_from_string(const std::string& name);

/// The nonsmooth term r of the composite objective.
struct Regularizer {
  enum class Kind { Zero, L1, Box };

  Kind kind = Kind::Zero;
  double weight = 0.0;  // l1 weight
  double lo = 0.0;      // box bounds
  double hi = 0.0;

  static Regularizer zero() { return {}; }
  static Regularizer l1(double weight);
  static Regularizer box(double lo, double hi);

  /// r(x); +infinity outside the box for the indicator.
  double value(const Vector& x) const;
  /// argmin_y r(y) + ||y - x||^2 / (2 step).
  Vector prox(const Vector& x, double step) const;
};

/// Raw samples of one agent: rows of `features` are a_i^j, `labels` holds b_i^j.
struct AgentData {
  Matrix features;
  Vector labels;
};

/// f(x) = 0.5 x'Hx - c'x + offset.
struct QuadraticModel {
  Matrix hessian;
  Vector linear;
  double offset = 0.0;

  double value(const Vector& x) const { return 0.5 * x.dot(hessian * x) - linear.dot(x) + offset; }
  Vector grad(const Vector& x) const { return hessian * x - linear; }
};

/// The distributed composite problem  min (1/m) sum_i f_i(x) + r(x).
///
/// Quadratic-ridge losses are f_i(x) = ||A_i x - b_i||^2 / (2n) + lambda ||x||^2
/// and are cached in quadratic form at construction. Classification losses are
/// f_i(x) = (1/n) sum_j l(b_i^j <a_i^j, x>) + (lambda/2) ||x||^2.
/// Instances are immutable once built, so oracles may be called concurrently.
class ProblemSpec {
 public:
  /// Sample-based problem (ridge or classification).
  static ProblemSpec from_samples(LossKind loss, std::vector<AgentData> agents, double lambda,
                                  Regularizer reg = Regularizer::zero());

  /// Quadratic problem given directly by per-agent Hessians and linear terms.
  static ProblemSpec from_quadratics(std::vector<QuadraticModel> agents,
                                     Regularizer reg = Regularizer::zero());

  std::size_t agents() const noexcept { return m_; }
  std::size_t samples_per_agent() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }
  LossKind loss() const noexcept { return loss_; }
  double lambda() const noexcept { return lambda_; }
  const Regularizer& regularizer() const noexcept { return reg_; }
  bool is_quadratic() const noexcept { return loss_ == LossKind::QuadraticRidge; }

  /// Raw samples; empty matrices for problems built from quadratics.
  const AgentData& data(std::size_t i) const { return data_.at(i); }

  /// Quadratic form of f_i; only valid for quadratic problems.
  const QuadraticModel& quadratic(std::size_t i) const;
  /// Quadratic form of f = (1/m) sum f_i; only valid for quadratic problems.
  const QuadraticModel& average_quadratic() const;

  /// Exact Hessian (quadratic) or the C_l-based upper bound H_i (classification).
  const Matrix& curvature_bound(std::size_t i) const { return curvature_.at(i); }
  /// lambda_max(curvature_bound(i)).
  double agent_smoothness(std::size_t i) const { return agent_smoothness_.at(i); }

  /// Second-derivative bound C_l of the scalar loss (1 for hinge, 1/4 for logistic).
  static double curvature_constant(LossKind loss);

 private:
  ProblemSpec() = default;
  void finalize();

  std::size_t m_ = 0, n_ = 0, d_ = 0;
  LossKind loss_ = LossKind::QuadraticRidge;
  double lambda_ = 0.0;
  Regularizer reg_;
  std::vector<AgentData> data_;
  std::vector<QuadraticModel> quadratics_;
  QuadraticModel average_;
  std::vector<Matrix> curvature_;
  std::vector<double> agent_smoothness_;
};

double smooth_hinge(double t);
double smooth_hinge_deriv(double t);
double logistic_loss(double t);
double logistic_deriv(double t);

double local_value(const ProblemSpec& p, std::size_t i, const Vector& x);
Vector local_grad(const ProblemSpec& p, std::size_t i, const Vector& x);

/// f(x) = (1/m) sum_i f_i(x).
double average_value(const ProblemSpec& p, const Vector& x);
Vector average_grad(const ProblemSpec& p, const Vector& x);
/// u(x) = f(x) + r(x).
double objective_value(const ProblemSpec& p, const Vector& x);

Vector prox_r(const ProblemSpec& p, const Vector& x, double step);

/// Estimated problem constants used for tuning.
struct Constants {
  double mu_hat = 0.0;
  double L_hat = 0.0;
  double Lmx_hat = 0.0;
  double beta_hat = 0.0;

  double kappa_hat() const { return L_hat / mu_hat; }
};

/// Quadratic problems use exact Hessian spectra; classification problems use
/// mu = lambda, L = mean_i lambda_max(H_i), beta = max_i ||H_i - mean H||.
Constants estimate_constants(const ProblemSpec& p);

}  // namespace accsim
