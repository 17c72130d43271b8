#include "accsim/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "accsim/error.hpp"

namespace accsim {

const char* to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::QuadraticRidge: return "quadratic-ridge";
    case LossKind::SmoothHinge: return "smooth-hinge";
    case LossKind::Logistic: return "logistic";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "quadratic-ridge" || name == "ridge") return LossKind::QuadraticRidge;
  if (name == "smooth-hinge" || name == "hinge") return LossKind::SmoothHinge;
  if (name == "logistic") return LossKind::Logistic;
  throw Error(ErrorKind::InvalidInput, "unknown loss kind '" + name + "'");
}

Regularizer Regularizer::l1(double weight) {
  if (!(weight >= 0.0)) throw Error(ErrorKind::InvalidInput, "l1 weight must be >= 0");
  Regularizer r;
  r.kind = Kind::L1;
  r.weight = weight;
  return r;
}

Regularizer Regularizer::box(double lo, double hi) {
  if (!(lo <= hi)) throw Error(ErrorKind::InvalidInput, "box requires lo <= hi");
  Regularizer r;
  r.kind = Kind::Box;
  r.lo = lo;
  r.hi = hi;
  return r;
}

double Regularizer::value(const Vector& x) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::L1: return weight * x.lpNorm<1>();
    case Kind::Box: {
      constexpr double slack = 1e-12;
      for (Eigen::Index j = 0; j < x.size(); ++j)
        if (x(j) < lo - slack || x(j) > hi + slack) return std::numeric_limits<double>::infinity();
      return 0.0;
    }
  }
  return 0.0;
}

Vector Regularizer::prox(const Vector& x, double step) const {
  switch (kind) {
    case Kind::Zero: return x;
    case Kind::L1: {
      const double t = weight * step;
      return x.unaryExpr([t](double v) { return std::copysign(std::max(std::abs(v) - t, 0.0), v); });
    }
    case Kind::Box: return x.cwiseMax(lo).cwiseMin(hi);
  }
  return x;
}

double ProblemSpec::curvature_constant(LossKind loss) {
  switch (loss) {
    case LossKind::SmoothHinge: return 1.0;
    case LossKind::Logistic: return 0.25;
    case LossKind::QuadraticRidge: return 1.0;
  }
  return 1.0;
}

ProblemSpec ProblemSpec::from_samples(LossKind loss, std::vector<AgentData> agents, double lambda,
                                      Regularizer reg) {
  if (agents.empty()) throw Error(ErrorKind::InvalidInput, "problem needs at least one agent");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorKind::InvalidInput, "lambda must be finite and >= 0");
  const auto n = agents.front().features.rows();
  const auto d = agents.front().features.cols();
  if (n < 1 || d < 1) throw Error(ErrorKind::InvalidInput, "agents need n >= 1 samples of d >= 1");
  for (const auto& a : agents) {
    if (a.features.rows() != n || a.features.cols() != d || a.labels.size() != n)
      throw Error(ErrorKind::InvalidInput, "every agent must hold identical n and d");
    if (loss != LossKind::QuadraticRidge) {
      for (Eigen::Index j = 0; j < n; ++j)
        if (a.labels(j) != 1.0 && a.labels(j) != -1.0)
          throw Error(ErrorKind::InvalidInput, "classification labels must be in {-1, +1}");
    }
  }

  ProblemSpec p;
  p.m_ = agents.size();
  p.n_ = static_cast<std::size_t>(n);
  p.d_ = static_cast<std::size_t>(d);
  p.loss_ = loss;
  p.lambda_ = lambda;
  p.reg_ = reg;
  p.data_ = std::move(agents);

  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix eye = Matrix::Identity(d, d);
  p.curvature_.reserve(p.m_);
  for (const auto& a : p.data_) {
    Matrix gram = Matrix::Zero(d, d);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a.features.transpose(), inv_n);
    gram = gram.selfadjointView<Eigen::Lower>();
    if (loss == LossKind::QuadraticRidge) {
      QuadraticModel q;
      q.hessian = gram + 2.0 * lambda * eye;
      q.linear = inv_n * (a.features.transpose() * a.labels);
      q.offset = 0.5 * inv_n * a.labels.squaredNorm();
      p.curvature_.push_back(q.hessian);
      p.quadratics_.push_back(std::move(q));
    } else {
      // (b_i^j)^2 = 1 for +-1 labels.
      p.curvature_.push_back(curvature_constant(loss) * gram + lambda * eye);
    }
  }
  p.finalize();
  return p;
}

ProblemSpec ProblemSpec::from_quadratics(std::vector<QuadraticModel> agents, Regularizer reg) {
  if (agents.empty()) throw Error(ErrorKind::InvalidInput, "problem needs at least one agent");
  const auto d = agents.front().hessian.rows();
  for (const auto& q : agents) {
    if (q.hessian.rows() != d || q.hessian.cols() != d || q.linear.size() != d)
      throw Error(ErrorKind::InvalidInput, "every agent must share the dimension d");
  }
  ProblemSpec p;
  p.m_ = agents.size();
  p.n_ = 1;
  p.d_ = static_cast<std::size_t>(d);
  p.loss_ = LossKind::QuadraticRidge;
  p.lambda_ = 0.0;
  p.reg_ = reg;
  p.data_.assign(p.m_, AgentData{});
  p.quadratics_ = std::move(agents);
  for (const auto& q : p.quadratics_) p.curvature_.push_back(q.hessian);
  p.finalize();
  return p;
}

void ProblemSpec::finalize() {
  agent_smoothness_.clear();
  for (const auto& h : curvature_) agent_smoothness_.push_back(symmetric_eigen_range(h).max);
  if (loss_ == LossKind::QuadraticRidge) {
    const auto d = static_cast<Eigen::Index>(d_);
    average_.hessian = Matrix::Zero(d, d);
    average_.linear = Vector::Zero(d);
    average_.offset = 0.0;
    for (const auto& q : quadratics_) {
      average_.hessian += q.hessian;
      average_.linear += q.linear;
      average_.offset += q.offset;
    }
    const double inv_m = 1.0 / static_cast<double>(m_);
    average_.hessian *= inv_m;
    average_.linear *= inv_m;
    average_.offset *= inv_m;
  }
}

const QuadraticModel& ProblemSpec::quadratic(std::size_t i) const {
  if (!is_quadratic()) throw Error(ErrorKind::InvalidInput, "problem is not quadratic");
  return quadratics_.at(i);
}

const QuadraticModel& ProblemSpec::average_quadratic() const {
  if (!is_quadratic()) throw Error(ErrorKind::InvalidInput, "problem is not quadratic");
  return average_;
}

double smooth_hinge(double t) {
  if (t > 1.0) return 0.0;
  if (t >= 0.0) return 0.5 * (t - 1.0) * (t - 1.0);
  return 0.5 - t;
}

double smooth_hinge_deriv(double t) {
  if (t > 1.0) return 0.0;
  if (t >= 0.0) return t - 1.0;
  return -1.0;
}

double logistic_loss(double t) {
  // log(1 + e^{-t}) without overflow.
  return t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

double logistic_deriv(double t) {
  // -1 / (1 + e^{t})
  if (t > 0.0) {
    const double e = std::exp(-t);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(t));
}

namespace {

void check_args(const ProblemSpec& p, std::size_t i, const Vector& x) {
  if (i >= p.agents()) throw Error(ErrorKind::InvalidInput, "agent index out of range");
  if (static_cast<std::size_t>(x.size()) != p.dim())
    throw Error(ErrorKind::InvalidInput, "x has the wrong dimension");
  if (!x.allFinite()) throw Error(ErrorKind::InvalidInput, "x must be finite");
}

double scalar_loss(LossKind k, double t) {
  return k == LossKind::SmoothHinge ? smooth_hinge(t) : logistic_loss(t);
}

double scalar_deriv(LossKind k, double t) {
  return k == LossKind::SmoothHinge ? smooth_hinge_deriv(t) : logistic_deriv(t);
}

}  // namespace

double local_value(const ProblemSpec& p, std::size_t i, const Vector& x) {
  check_args(p, i, x);
  if (p.is_quadratic()) return p.quadratic(i).value(x);
  const auto& a = p.data(i);
  const Vector margins = a.labels.cwiseProduct(a.features * x);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < margins.size(); ++j) sum += scalar_loss(p.loss(), margins(j));
  return sum / static_cast<double>(p.samples_per_agent()) + 0.5 * p.lambda() * x.squaredNorm();
}

Vector local_grad(const ProblemSpec& p, std::size_t i, const Vector& x) {
  check_args(p, i, x);
  if (p.is_quadratic()) return p.quadratic(i).grad(x);
  const auto& a = p.data(i);
  const Vector margins = a.labels.cwiseProduct(a.features * x);
  Vector weights(margins.size());
  for (Eigen::Index j = 0; j < margins.size(); ++j)
    weights(j) = scalar_deriv(p.loss(), margins(j)) * a.labels(j);
  return a.features.transpose() * weights / static_cast<double>(p.samples_per_agent()) +
         p.lambda() * x;
}

double average_value(const ProblemSpec& p, const Vector& x) {
  if (p.is_quadratic()) return p.average_quadratic().value(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.agents(); ++i) sum += local_value(p, i, x);
  return sum / static_cast<double>(p.agents());
}

Vector average_grad(const ProblemSpec& p, const Vector& x) {
  if (p.is_quadratic()) return p.average_quadratic().grad(x);
  Vector g = Vector::Zero(x.size());
  for (std::size_t i = 0; i < p.agents(); ++i) g += local_grad(p, i, x);
  return g / static_cast<double>(p.agents());
}

double objective_value(const ProblemSpec& p, const Vector& x) {
  return average_value(p, x) + p.regularizer().value(x);
}

Vector prox_r(const ProblemSpec& p, const Vector& x, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidInput, "prox step must be > 0");
  return p.regularizer().prox(x, step);
}

Constants estimate_constants(const ProblemSpec& p) {
  const auto m = p.agents();
  const auto d = static_cast<Eigen::Index>(p.dim());
  Matrix mean_h = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < m; ++i) mean_h += p.curvature_bound(i);
  mean_h /= static_cast<double>(m);

  Constants c;
  for (std::size_t i = 0; i < m; ++i) {
    c.Lmx_hat = std::max(c.Lmx_hat, p.agent_smoothness(i));
    c.beta_hat = std::max(c.beta_hat, symmetric_spectral_norm(p.curvature_bound(i) - mean_h));
  }
  if (p.is_quadratic()) {
    const auto range = symmetric_eigen_range(mean_h);
    c.mu_hat = range.min;
    c.L_hat = range.max;
  } else {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += p.agent_smoothness(i);
    c.mu_hat = p.lambda();
    c.L_hat = sum / static_cast<double>(m);
  }
  // Relative threshold: eigenvalues of a singular Gram matrix come back at roundoff level.
  if (!(c.mu_hat > 1e-12 * std::max(c.L_hat, 1.0)))
    throw Error(ErrorKind::DegenerateStrongConvexity,
                "average loss is not strongly convex (mu_hat = " + std::to_string(c.mu_hat) + ")");
  return c;
}

}  // namespace accsim
