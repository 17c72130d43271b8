#include <cmath>
#include <random>

#include <doctest.h>

#include "accsim/datagen.hpp"
#include "accsim/diagnostics.hpp"
#include "accsim/error.hpp"
#include "accsim/problems.hpp"

using namespace accsim;

namespace {

ProblemSpec single_sample(LossKind loss, const Vector& a, double b, double lambda) {
  AgentData agent;
  agent.features = a.transpose();
  agent.labels = Vector::Constant(1, b);
  return ProblemSpec::from_samples(loss, {agent}, lambda);
}

std::vector<AgentData> random_agents(std::size_t m, std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::vector<AgentData> agents(m);
  for (auto& a : agents) {
    a.features = Matrix::NullaryExpr(n, d, [&] { return normal(gen); });
    a.labels = Vector::NullaryExpr(n, [&] { return normal(gen) > 0.0 ? 1.0 : -1.0; });
  }
  return agents;
}

}  // namespace

TEST_CASE("ridge value with A = I2, b = 0 is ||x||^2 / (2n)") {
  AgentData a{Matrix::Identity(2, 2), Vector::Zero(2)};
  const auto p = ProblemSpec::from_samples(LossKind::QuadraticRidge, {a}, 0.0);
  // ||A x - b||^2 / (2n) with n = 2 rows: 2 / 4.
  CHECK(local_value(p, 0, Vector::Ones(2)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("ridge value includes lambda ||x||^2") {
  AgentData a{Matrix::Identity(2, 2), Vector::Zero(2)};
  const auto p = ProblemSpec::from_samples(LossKind::QuadraticRidge, {a}, 0.25);
  CHECK(local_value(p, 0, Vector::Ones(2)) == doctest::Approx(0.5 + 0.25 * 2.0));
}

TEST_CASE("smooth hinge pieces") {
  CHECK(smooth_hinge(1.5) == 0.0);
  CHECK(smooth_hinge(-1.0) == 1.5);
  CHECK(smooth_hinge(0.5) == 0.125);
  // Derivative continuity at the breakpoints.
  CHECK(smooth_hinge_deriv(0.0) == -1.0);
  CHECK(smooth_hinge_deriv(-1e-300) == -1.0);
  CHECK(smooth_hinge_deriv(1.0) == 0.0);
  CHECK(smooth_hinge_deriv(std::nextafter(1.0, 2.0)) == 0.0);
}

TEST_CASE("smooth hinge is convex and 1-smooth on a grid") {
  const double h = 1e-3;
  for (double t = -2.0; t <= 3.0; t += 0.01) {
    const double second = (smooth_hinge(t + h) - 2.0 * smooth_hinge(t) + smooth_hinge(t - h)) / (h * h);
    CHECK(second >= -1e-9);
    CHECK(second <= 1.0 + 1e-6);
  }
}

TEST_CASE("smooth-hinge sample values") {
  const Vector a = (Vector(2) << 1.0, 1.0).finished();
  const double lambda = 0.2;
  // margin t = b <a, x> = 2 gives zero loss, leaving the penalty.
  const auto p = single_sample(LossKind::SmoothHinge, a, 1.0, lambda);
  const Vector x = Vector::Ones(2);
  CHECK(local_value(p, 0, x) == doctest::Approx(0.5 * lambda * x.squaredNorm()));
  const auto q = single_sample(LossKind::SmoothHinge, a, 1.0, 0.0);
  CHECK(local_value(q, 0, Vector::Constant(2, 0.25)) == doctest::Approx(0.125));
}

TEST_CASE("logistic loss is stable for large margins") {
  CHECK(logistic_loss(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(std::isfinite(logistic_loss(-1000.0)));
  CHECK(logistic_loss(-1000.0) == doctest::Approx(1000.0));
  CHECK(logistic_loss(1000.0) == 0.0);
  CHECK(logistic_deriv(0.0) == doctest::Approx(-0.5));
}

TEST_CASE("ridge gradient is A'(Ax - b)/n") {
  const auto agents = random_agents(1, 7, 3, 4);
  const auto p = ProblemSpec::from_samples(LossKind::QuadraticRidge, agents, 0.0);
  const Vector x = (Vector(3) << 0.3, -1.0, 2.0).finished();
  const auto& A = agents[0].features;
  const Vector expected = A.transpose() * (A * x - agents[0].labels) / 7.0;
  CHECK((local_grad(p, 0, x) - expected).norm() <= 1e-12);
}

TEST_CASE("gradients match central differences at 10 random points") {
  const auto agents = random_agents(2, 25, 5, 9);
  std::mt19937_64 gen(10);
  std::normal_distribution<double> normal;
  for (const auto loss : {LossKind::QuadraticRidge, LossKind::SmoothHinge, LossKind::Logistic}) {
    CAPTURE(to_string(loss));
    const auto p = ProblemSpec::from_samples(loss, agents, 0.1);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector x = Vector::NullaryExpr(5, [&] { return normal(gen); });
      for (std::size_t i = 0; i < 2; ++i) {
        const Vector g = local_grad(p, i, x);
        Vector fd(5);
        for (int j = 0; j < 5; ++j) {
          Vector xp = x, xm = x;
          xp(j) += 1e-6;
          xm(j) -= 1e-6;
          fd(j) = (local_value(p, i, xp) - local_value(p, i, xm)) / 2e-6;
        }
        CHECK((fd - g).norm() / g.norm() <= 1e-5);
      }
    }
  }
}

TEST_CASE("gradient of the average vanishes at the minimizer") {
  const auto p = gen_ridge([] {
    SyntheticRidgeConfig c;
    c.m = 4;
    c.n = 50;
    c.d = 6;
    c.seed = 3;
    return c;
  }());
  const auto oracle = centralized_solve(p);
  Vector g = Vector::Zero(6);
  for (std::size_t i = 0; i < 4; ++i) g += local_grad(p, i, oracle.x_star);
  CHECK((g / 4.0).norm() <= 1e-8);
}

TEST_CASE("oracles reject bad input") {
  AgentData a{Matrix::Identity(2, 2), Vector::Zero(2)};
  const auto p = ProblemSpec::from_samples(LossKind::QuadraticRidge, {a}, 0.0);
  Vector bad = Vector::Ones(2);
  bad(1) = std::nan("");
  CHECK_THROWS_AS(local_value(p, 0, bad), Error);
  CHECK_THROWS_AS(local_grad(p, 1, Vector::Ones(2)), Error);
  CHECK_THROWS_AS(local_grad(p, 0, Vector::Ones(3)), Error);
  AgentData bad_labels{Matrix::Identity(2, 2), Vector::Constant(2, 0.5)};
  CHECK_THROWS_AS(ProblemSpec::from_samples(LossKind::Logistic, {bad_labels}, 0.1), Error);
}

TEST_CASE("prox of the regularizers") {
  AgentData a{Matrix::Identity(3, 3), Vector::Zero(3)};
  const Vector x = (Vector(3) << -3.0, 0.4, 7.0).finished();
  const auto zero = ProblemSpec::from_samples(LossKind::QuadraticRidge, {a}, 0.0);
  CHECK(prox_r(zero, x, 0.7) == x);

  const auto l1 = Regularizer::l1(1.0);
  const Vector y = l1.prox((Vector(2) << 2.0, -0.5).finished(), 1.0);
  CHECK(y(0) == 1.0);
  CHECK(y(1) == 0.0);

  const auto box = ProblemSpec::from_samples(LossKind::QuadraticRidge, {a}, 0.0, Regularizer::box(0.0, 1.0));
  const Vector z = prox_r(box, x, 1.0);
  CHECK(z(0) == 0.0);
  CHECK(z(1) == 0.4);
  CHECK(z(2) == 1.0);
  CHECK(std::isinf(box.regularizer().value(x)));
  CHECK_THROWS_AS(prox_r(box, x, 0.0), Error);
}

TEST_CASE("prox is non-expansive on random pairs") {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> normal;
  for (const auto& r : {Regularizer::zero(), Regularizer::l1(0.7), Regularizer::box(-0.5, 0.3)}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Vector x = Vector::NullaryExpr(6, [&] { return 2.0 * normal(gen); });
      const Vector y = Vector::NullaryExpr(6, [&] { return 2.0 * normal(gen); });
      CHECK((r.prox(x, 0.9) - r.prox(y, 0.9)).norm() <= (x - y).norm() + 1e-15);
    }
  }
}

TEST_CASE("constants of a single diagonal agent") {
  AgentData a{Matrix::Zero(2, 2), Vector::Zero(2)};
  a.features.diagonal() << 1.0, 2.0;
  const auto p = ProblemSpec::from_samples(LossKind::QuadraticRidge, {a}, 0.0);
  const auto c = estimate_constants(p);
  // (1/n) A'A = diag(1/2, 2).
  CHECK(c.mu_hat == doctest::Approx(0.5));
  CHECK(c.L_hat == doctest::Approx(2.0));
  CHECK(c.beta_hat == 0.0);
}

TEST_CASE("identical agents have beta = 0") {
  auto agents = random_agents(1, 20, 4, 5);
  agents.push_back(agents[0]);
  agents.push_back(agents[0]);
  const auto c = estimate_constants(ProblemSpec::from_samples(LossKind::QuadraticRidge, agents, 0.0));
  CHECK(c.beta_hat <= 1e-14);
}

TEST_CASE("rank-deficient ridge without penalty is degenerate") {
  AgentData a{Matrix::Zero(3, 3), Vector::Zero(3)};
  a.features(0, 0) = 1.0;
  a.features(1, 1) = 1.0;
  const auto p = ProblemSpec::from_samples(LossKind::QuadraticRidge, {a}, 0.0);
  try {
    estimate_constants(p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateStrongConvexity);
  }
  CHECK_NOTHROW(estimate_constants(ProblemSpec::from_samples(LossKind::QuadraticRidge, {a}, 0.1)));
}

TEST_CASE("constants ordering and beta realization on generated instances") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticRidgeConfig cfg;
    cfg.m = 5;
    cfg.n = 60;
    cfg.d = 6;
    cfg.seed = seed;
    const auto p = gen_ridge(cfg);
    const auto c = estimate_constants(p);
    CHECK(c.mu_hat > 0.0);
    CHECK(c.mu_hat <= c.L_hat);
    CHECK(c.L_hat <= c.Lmx_hat * (1.0 + 1e-12));
    double beta = 0.0;
    const Matrix& H = p.average_quadratic().hessian;
    for (std::size_t i = 0; i < p.agents(); ++i)
      beta = std::max(beta, (p.quadratic(i).hessian - H).operatorNorm());
    CHECK(c.beta_hat == doctest::Approx(beta).epsilon(1e-10));
  }
}

TEST_CASE("classification constants use the curvature bound") {
  const auto agents = random_agents(3, 30, 4, 6);
  const auto hinge = estimate_constants(ProblemSpec::from_samples(LossKind::SmoothHinge, agents, 0.05));
  const auto logit = estimate_constants(ProblemSpec::from_samples(LossKind::Logistic, agents, 0.05));
  CHECK(hinge.mu_hat == 0.05);
  CHECK(logit.mu_hat == 0.05);
  // H_i = C gram + lambda I, so the spectra shift with C.
  CHECK((logit.L_hat - 0.05) == doctest::Approx((hinge.L_hat - 0.05) / 4.0));
  CHECK(logit.beta_hat == doctest::Approx(hinge.beta_hat / 4.0));
}

TEST_CASE("loss names round-trip") {
  for (const auto loss : {LossKind::QuadraticRidge, LossKind::SmoothHinge, LossKind::Logistic})
    CHECK(loss_kind_from_string(to_string(loss)) == loss);
  CHECK_THROWS_AS(loss_kind_from_string("hinge2"), Error);
}
