#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "accsim/error.hpp"
#include "accsim/network.hpp"

using namespace accsim;

namespace {

double fresh_rho(const Matrix& W) {
  const auto m = W.rows();
  const Matrix D = W - Matrix::Constant(m, m, 1.0 / static_cast<double>(m));
  Eigen::SelfAdjointEigenSolver<Matrix> es(D, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void check_gossip(const GossipMatrix& g) {
  CHECK(stochasticity_error(g.W) <= 1e-12);
  CHECK(g.rho < 1.0);
  CHECK(std::abs(g.rho - fresh_rho(g.W)) <= 1e-10);
  CHECK((g.W - g.W.transpose()).norm() <= 1e-12);
}

}  // namespace

TEST_CASE("erdos-renyi graphs") {
  const auto full = erdos_renyi(8, 1.0, 1);
  CHECK(full.edges().size() == 28);
  for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(erdos_renyi(30, 0.5, seed).connected());
  CHECK(erdos_renyi(30, 0.5, 42).edges() == erdos_renyi(30, 0.5, 42).edges());
  CHECK(erdos_renyi(30, 0.5, 42).edges() != erdos_renyi(30, 0.5, 43).edges());
  try {
    erdos_renyi(50, 0.001, 3);
    FAIL("expected topology failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TopologyGenerationFailed);
  }
}

TEST_CASE("line and star graphs") {
  using E = Graph::Edge;
  CHECK(line_graph(3).edges() == std::vector<E>{{0, 1}, {1, 2}});
  CHECK(star_graph(4).edges() == std::vector<E>{{0, 1}, {0, 2}, {0, 3}});
  for (std::size_t m = 2; m < 12; ++m) {
    CHECK(line_graph(m).connected());
    CHECK(star_graph(m).connected());
  }
  CHECK_FALSE(Graph(3, {{0, 1}}).connected());
  const auto hops = line_graph(5).hop_distances(0);
  CHECK(hops == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(Graph(3, {{1, 0}, {0, 1}}).edges().size() == 1);
  CHECK_THROWS_AS(Graph(3, {{1, 1}}), Error);
}

TEST_CASE("metropolis-hastings weights") {
  const auto two = metropolis_hastings(complete_graph(2));
  CHECK((two.W - Matrix::Constant(2, 2, 0.5)).norm() <= 1e-15);
  CHECK(two.rho <= 1e-15);

  const auto line = metropolis_hastings(line_graph(3));
  CHECK(line.W(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(line.W(1, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(line.W(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(line.W(1, 1) == doctest::Approx(1.0 / 3.0));
  // By hand W has eigenvectors 1, (1,0,-1) and (1,-2,1) with eigenvalues 1, 2/3 and 0.
  CHECK(line.rho == doctest::Approx(2.0 / 3.0));
  check_gossip(line);
  check_gossip(metropolis_hastings(erdos_renyi(30, 0.5, 2)));
  check_gossip(metropolis_hastings(star_graph(9)));
  CHECK_THROWS_AS(metropolis_hastings(Graph(3, {{0, 1}})), Error);
}

TEST_CASE("exact averaging") {
  const auto g = exact_averaging(3);
  const Vector x = (Vector(3) << 1.0, 2.0, 6.0).finished();
  CHECK((g.W * x - Vector::Constant(3, 3.0)).norm() <= 1e-14);
  CHECK(g.rho <= 1e-15);
}

TEST_CASE("from_matrix validates") {
  Matrix bad = Matrix::Identity(3, 3);
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(GossipMatrix::from_matrix(bad), Error);
  CHECK_THROWS_AS(GossipMatrix::from_matrix(Matrix::Identity(3, 3)), Error);  // rho = 1
}

TEST_CASE("chebyshev degree 1 does not increase rho") {
  const auto base = metropolis_hastings(erdos_renyi(20, 0.3, 4));
  const auto one = chebyshev_accelerate(base, 1);
  CHECK(one.rho <= base.rho + 1e-12);
  check_gossip(one);
  CHECK(one.rounds_per_application == 1);
}

TEST_CASE("chebyshev acceleration bounds") {
  for (const std::size_t M : {2, 3, 5, 8, 20, 60}) {
    CAPTURE(M);
    const auto base = metropolis_hastings(line_graph(15));
    const auto acc = chebyshev_accelerate(base, M);
    check_gossip(acc);
    CHECK(acc.rho <= base.rho + 1e-12);
    CHECK(acc.rho <= chebyshev_rho_bound(base.rho, M) + 1e-8);
    CHECK(acc.rounds_per_application == M);
    const Vector ones = Vector::Ones(15);
    CHECK((acc.W * ones - ones).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("chebyshev on a positive semidefinite base meets the tighter bound") {
  // Lazy walk (I + W)/2 is PSD.
  const auto mh = metropolis_hastings(line_graph(12));
  const auto lazy = GossipMatrix::from_matrix(0.5 * (Matrix::Identity(12, 12) + mh.W));
  for (const std::size_t M : {2, 4, 7}) {
    const auto acc = chebyshev_accelerate(lazy, M);
    CHECK(acc.rho <= chebyshev_rho_bound_psd(lazy.rho, M) + 1e-8);
  }
}

TEST_CASE("chebyshev bound formula") {
  const double rho = 0.9;
  const double xi = (1.0 - std::sqrt(1.0 - rho * rho)) / rho;
  CHECK(chebyshev_rho_bound(rho, 3) == doctest::Approx(2.0 * std::pow(xi, 3) / (1.0 + std::pow(xi, 6))));
  // 1/T_3(1/rho) with T_3(z) = 4z^3 - 3z.
  const double z = 1.0 / rho;
  CHECK(chebyshev_rho_bound(rho, 3) == doctest::Approx(1.0 / (4 * z * z * z - 3 * z)));
}

TEST_CASE("rounds_for_target") {
  CHECK(rounds_for_target(0.5, 0.6) == 1);
  CHECK(rounds_for_target(0.0, 0.1) == 1);
  const std::size_t M = rounds_for_target(0.9, 0.1);
  CHECK(chebyshev_rho_bound(0.9, M) <= 0.1);
  CHECK(chebyshev_rho_bound(0.9, M - 1) > 0.1);
  try {
    rounds_for_target(0.5, 0.0);
    FAIL("expected unreachable target");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnreachableTarget);
  }
  CHECK(rounds_for_target(0.0, 0.0) == 1);
}

TEST_CASE("accelerate_to_target reaches the target") {
  const auto base = metropolis_hastings(line_graph(20));
  const auto acc = accelerate_to_target(base, 0.05);
  CHECK(acc.rho <= 0.05);
  CHECK(fresh_rho(acc.W) <= 0.05);
  const auto same = accelerate_to_target(base, 0.999);
  CHECK(same.rounds_per_application == 1);
}

TEST_CASE("line W with a = 0 matches the cosine formula") {
  for (const double rho : {0.5, 0.9, 0.99})
    for (const std::size_t m : {3, 5, 10, 40}) {
      const Matrix W = line_weight_matrix(m, 0.0, rho);
      CHECK(fresh_rho(W) == doctest::Approx(line_rho_m(rho, m)).epsilon(1e-10));
      CHECK(line_rho_m(rho, m) ==
            doctest::Approx(rho / (2 + rho) + 2 * std::cos(std::numbers::pi / static_cast<double>(m)) / (2 + rho)));
    }
}

TEST_CASE("line_gossip_for_rho brackets and hits the target") {
  for (const double rho : {0.3, 0.6, 0.9, 0.97, 0.995}) {
    CAPTURE(rho);
    const auto lg = line_gossip_for_rho(rho, 10000);
    CHECK(std::abs(lg.gossip.rho - rho) <= 1e-6);
    check_gossip(lg.gossip);
    if (lg.m_index >= 3) {
      CHECK(line_rho_m(rho, lg.m_index) < rho);
      CHECK(rho <= line_rho_m(rho, lg.m_index + 1));
      CHECK(lg.gossip.nodes() == lg.m_index);
    } else {
      CHECK(lg.gossip.nodes() == 3);
    }
    CHECK(lg.a >= 0.0);
    CHECK(lg.a < 1.0);
  }
  try {
    line_gossip_for_rho(0.9999, 10);
    FAIL("expected instance-too-large");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InstanceTooLarge);
  }
}

TEST_CASE("hard instance structure") {
  const double mu = 0.01, beta = 0.5;
  const std::size_t m = 40, d = 10;
  const auto p = hard_instance(mu, beta, m, d);
  const auto groups = hard_instance_groups(m);
  CHECK(groups.left_end == 2);     // ceil(40/32)
  CHECK(groups.right_begin == 38);  // floor(31*40/32)
  for (std::size_t i = 0; i < m; ++i) CHECK(symmetric_eigen_range(p.quadratic(i).hessian).min >= mu - 1e-10);

  const double s = beta * (1 - mu) * m / (4.0 * groups.left_end);
  const Matrix& H_left = p.quadratic(0).hessian;
  const Matrix& H_right = p.quadratic(m - 1).hessian;
  // A1 couples (2,3), (4,5), ... (1-based), A2 couples (1,2), (3,4), ...
  CHECK(H_left(0, 0) == doctest::Approx(s + mu));
  CHECK(H_left(0, 1) == 0.0);
  CHECK(H_left(1, 2) == doctest::Approx(-s));
  CHECK(H_left(2, 3) == 0.0);
  CHECK(H_right(0, 1) == doctest::Approx(-s));
  CHECK(H_right(1, 2) == 0.0);
  CHECK(p.quadratic(0).linear(0) == doctest::Approx(s));
  CHECK(p.quadratic(m / 2).hessian == mu * Matrix::Identity(d, d));
  CHECK_THROWS_AS(hard_instance(mu, beta, m, 7), Error);
}

TEST_CASE("cut distance on a line") {
  const auto groups = hard_instance_groups(64);
  CHECK(cut_distance(line_graph(64), groups) == groups.right_begin - (groups.left_end - 1));
}
