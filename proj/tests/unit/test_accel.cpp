#include <cmath>
#include <random>

#include <doctest.h>

#include "accsim/accel.hpp"
#include "accsim/datagen.hpp"
#include "accsim/error.hpp"

using namespace accsim;

namespace {

ProblemSpec ridge(std::size_t m, std::size_t n, std::size_t d, std::uint64_t seed, double L0 = 50.0) {
  SyntheticRidgeConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.d = d;
  cfg.L0 = L0;
  cfg.seed = seed;
  return gen_ridge(cfg);
}

Constants constants(double mu, double L, double beta) {
  Constants c;
  c.mu_hat = mu;
  c.L_hat = L;
  c.Lmx_hat = L;
  c.beta_hat = beta;
  return c;
}

}  // namespace

TEST_CASE("alpha from mu and delta") {
  const auto p = make_params(constants(1.0, 10.0, 5.0), SurrogateKind::F, 3.0, 2);
  CHECK(p.alpha == doctest::Approx(0.5));
  CHECK(p.alpha * p.alpha * (1.0 + 3.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.extrapolation() == doctest::Approx(1.0 / 3.0));
  const auto zero = make_params(constants(1.0, 10.0, 5.0), SurrogateKind::F, 0.0, 2);
  CHECK(zero.alpha == 1.0);
  CHECK(zero.extrapolation() == 0.0);
  CHECK_THROWS_AS(make_params(constants(1.0, 10.0, 5.0), SurrogateKind::F, -1.0, 2), Error);
}

TEST_CASE("tuning rules") {
  const auto e2 = tune(constants(1.0, 100.0, std::exp(2.0)), SurrogateKind::F);
  CHECK(e2.T == 2);
  CHECK(e2.delta == doctest::Approx(std::exp(2.0) - 1.0));
  CHECK(tune(constants(1.0, 100.0, 1.0001), SurrogateKind::F).T == 1);

  const auto l = tune(constants(2.0, 2000.0, 30.0), SurrogateKind::L);
  CHECK(l.T == static_cast<std::size_t>(std::ceil(std::log(1000.0))));
  CHECK(l.delta == doctest::Approx(1998.0));
  CHECK(l.surrogate.L_surr == doctest::Approx(2000.0 + 1998.0));

  const auto c = constants(1.0, 500.0, 40.0);
  CHECK(inner_iterations(c, SurrogateKind::F, TRule::Swapped) ==
        static_cast<std::size_t>(std::ceil(1.4 * std::log(500.0))));
  CHECK(inner_iterations(c, SurrogateKind::L, TRule::Swapped) ==
        static_cast<std::size_t>(std::ceil(std::log(40.0))));

  for (double b = 1.5; b < 1e4; b *= 1.7) {
    const auto p = tune(constants(1.0, 2e4, b), SurrogateKind::F);
    CHECK(p.extrapolation() >= 0.0);
    CHECK(p.extrapolation() < 1.0);
    CHECK(p.alpha > 0.0);
    CHECK(p.alpha <= 1.0);
  }
}

TEST_CASE("tuning errors") {
  try {
    tune(constants(1.0, 10.0, 1.0), SurrogateKind::F);
    FAIL("expected degenerate similarity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSimilarity);
  }
  try {
    tune(constants(1.0, 1.0, 3.0), SurrogateKind::L);
    FAIL("expected perfectly conditioned");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PerfectlyConditioned);
  }
  CHECK(t_rule_from_string("swapped") == TRule::Swapped);
  CHECK_THROWS_AS(t_rule_from_string("other"), Error);
}

TEST_CASE("communication count is K T rounds_per_application") {
  const auto p = ridge(6, 40, 4, 1);
  const auto c = estimate_constants(p);
  auto params = make_params(c, SurrogateKind::F, 2.0 * c.mu_hat, 3);
  const auto W = chebyshev_accelerate(metropolis_hastings(line_graph(6)), 2);
  const auto res = acc_sonata_run(p, params, W, 5);
  CHECK(res.comms == 5 * 3 * 2);
  CHECK(res.trajectory.size() == 1 + 5 * 3);
  CHECK(res.trajectory.front().comms == 0);
  for (std::size_t i = 1; i < res.trajectory.size(); ++i)
    CHECK(res.trajectory[i].comms > res.trajectory[i - 1].comms);

  AccelOptions half;
  half.half_duplex = true;
  CHECK(acc_sonata_run(p, params, W, 5, half).comms == 2 * 5 * 3 * 2);
}

TEST_CASE("warm-restart tracking identity holds for both modes") {
  const auto p = ridge(8, 60, 5, 2);
  const auto c = estimate_constants(p);
  const auto W = metropolis_hastings(erdos_renyi(8, 0.5, 2));
  for (const auto mode : {SurrogateKind::F, SurrogateKind::L}) {
    const auto params = make_params(c, mode, 3.0 * c.mu_hat, 3);
    AccelOptions opts;
    opts.on_inner = [&](const InnerEvent& e) {
      const Matrix g = e.shifted->local_grads(e.states->x);
      CHECK((row_mean(e.states->y) - row_mean(g)).lpNorm<Eigen::Infinity>() <= 1e-10);
    };
    const auto res = acc_sonata_run(p, params, W, 10, opts);
    CHECK(res.max_tracking_residual <= 1e-10);
  }
}

TEST_CASE("run stops at the target gap") {
  const auto p = ridge(8, 200, 10, 3, 500.0);
  const auto c = estimate_constants(p);
  AccelOptions opts;
  opts.target_gap = 1e-6;
  const auto res = acc_sonata_run(p, tune(c, SurrogateKind::F), metropolis_hastings(erdos_renyi(8, 0.5, 3)), 500, opts);
  CHECK(res.reached_target);
  CHECK(res.trajectory.back().gap <= 1e-6);
  CHECK(res.outer_iterations < 500);
  // Tail of log Delta decreases.
  std::vector<double> ends;
  for (const auto& r : res.trajectory)
    if (r.t == res.trajectory.back().t && r.t > 0) ends.push_back(std::log(r.gap));
  const std::size_t half = ends.size() / 2;
  CHECK(ends.back() < ends[half]);
}

TEST_CASE("accelerated run converges on a nonquadratic problem with l1") {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  std::vector<AgentData> agents(5);
  for (auto& a : agents) {
    a.features = Matrix::NullaryExpr(30, 4, [&] { return normal(gen); });
    a.labels = Vector::NullaryExpr(30, [&] { return normal(gen) > 0.0 ? 1.0 : -1.0; });
  }
  const auto p = ProblemSpec::from_samples(LossKind::Logistic, agents, 0.05, Regularizer::l1(0.01));
  const auto c = estimate_constants(p);
  AccelOptions opts;
  opts.target_gap = 1e-6;
  const auto res = acc_sonata_run(p, tune(c, SurrogateKind::F), metropolis_hastings(complete_graph(5)), 2000, opts);
  CHECK(res.reached_target);
  CHECK(res.unconverged_subproblems == 0);
  CHECK(res.max_subproblem_iters > 0);
}

TEST_CASE("potentials on an admissible network") {
  const auto p = ridge(6, 100, 4, 5, 20.0);
  const auto c = estimate_constants(p);
  const auto params = tune(c, SurrogateKind::F);
  const auto W = accelerate_to_target(metropolis_hastings(erdos_renyi(6, 0.5, 5)), admissible_rho(c, SurrogateKind::F));
  AccelOptions opts;
  opts.potentials = true;
  const std::size_t K = 6;
  const auto res = acc_sonata_run(p, params, W, K, opts);
  REQUIRE(res.outer_potentials.size() == K + 1);
  REQUIRE(res.warm_start_potential.size() == K);
  const auto pc = potential_constants(c, SurrogateKind::F, params.delta, params.alpha, params.c_seq);
  const double P0 = res.outer_potentials[0];
  for (std::size_t k = 1; k <= K; ++k) {
    CAPTURE(k);
    // Outer decay P^k <= c2 P^0 (1 - c alpha)^k.
    CHECK(res.outer_potentials[k] <= pc.c2 * P0 * std::pow(1.0 - params.c_seq * params.alpha, static_cast<double>(k)));
    // Warm start of iteration k is bounded in terms of P^0.
    if (k < K) CHECK(res.warm_start_potential[k] <= warm_start_bound(P0, k, params.mu, params.delta, params.alpha,
                                                                        params.c_seq, pc));
  }
  for (const auto& r : res.trajectory)
    if (r.t > 0) CHECK(r.g_plus_e >= 0.0);
  // P^k dominates the value arm of Delta.
  for (const auto& r : res.trajectory)
    if (!std::isnan(r.P_k)) CHECK(r.P_k >= 0.0);
}

TEST_CASE("delta = 0 equals restarted plain SONATA") {
  const auto p = ridge(5, 40, 3, 6);
  const auto c = estimate_constants(p);
  const auto params = make_params(c, SurrogateKind::L, 0.0, 3);
  const auto W = metropolis_hastings(line_graph(5));
  AccelOptions opts;
  opts.record_iterates = true;
  const auto res = acc_sonata_run(p, params, W, 4, opts);
  const auto base = ShiftedProblem::unshifted(p);
  const Matrix X0 = Matrix::Zero(5, 3);
  const auto plain = sonata_run(base, X0, base.local_grads(X0), 12, W, params.surrogate);
  CHECK((res.x_history.back() - plain.states.x).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("star path and exact averaging agree") {
  const auto p = ridge(4, 40, 3, 7);
  const auto c = estimate_constants(p);
  const auto params = make_params(c, SurrogateKind::L, c.L_hat - c.mu_hat, 2);
  AccelOptions opts;
  opts.record_iterates = true;
  opts.average_initial_tracking = true;
  const auto res = acc_sonata_run(p, params, exact_averaging(4), 5, opts);
  const auto star = acc_sonata_star_run(p, params, 5);
  CHECK(star.comms == 10);
  for (std::size_t k = 0; k <= 5; ++k)
    for (Eigen::Index i = 0; i < 4; ++i)
      CHECK((res.x_history[k].row(i).transpose() - star.x_history[k]).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("input validation") {
  const auto p = ridge(4, 40, 3, 8);
  const auto params = tune(estimate_constants(p), SurrogateKind::L);
  CHECK_THROWS_AS(acc_sonata_run(p, params, exact_averaging(3), 1), Error);
  auto bad = params;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(acc_sonata_run(p, bad, exact_averaging(4), 1), Error);
}
