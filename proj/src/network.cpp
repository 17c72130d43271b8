#include "accsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "accsim/error.hpp"
#include "accsim/rng.hpp"

namespace accsim {

Graph::Graph(std::size_t m, std::vector<Edge> edges) : m_(m) {
  for (auto& [i, j] : edges) {
    if (i >= m || j >= m) throw Error(ErrorKind::InvalidInput, "edge endpoint out of range");
    if (i == j) throw Error(ErrorKind::InvalidInput, "self-loops are implicit and not stored");
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(m_, 0);
  for (const auto& [i, j] : edges_) {
    ++deg[i];
    ++deg[j];
  }
  return deg;
}

bool Graph::connected() const {
  if (m_ <= 1) return true;
  std::vector<std::size_t> parent(m_);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::size_t components = m_;
  for (const auto& [i, j] : edges_) {
    const auto a = find(i), b = find(j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

std::vector<std::size_t> Graph::hop_distances(std::size_t source) const {
  std::vector<std::vector<std::size_t>> adj(m_);
  for (const auto& [i, j] : edges_) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<std::size_t> dist(m_, std::numeric_limits<std::size_t>::max());
  std::queue<std::size_t> q;
  dist.at(source) = 0;
  q.push(source);
  while (!q.empty()) {
    const auto v = q.front();
    q.pop();
    for (const auto w : adj[v])
      if (dist[w] == std::numeric_limits<std::size_t>::max()) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
  }
  return dist;
}

Graph erdos_renyi(std::size_t m, double p, std::uint64_t seed) {
  if (m < 2) throw Error(ErrorKind::InvalidInput, "erdos_renyi requires m >= 2");
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidInput, "edge probability must be in (0, 1]");
  constexpr int kMaxDraws = 100;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    auto rng = make_stream(seed, stream::kTopology, static_cast<std::uint64_t>(draw));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Graph::Edge> edges;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (unif(rng) < p) edges.emplace_back(i, j);
    Graph g(m, std::move(edges));
    if (g.connected()) return g;
  }
  throw Error(ErrorKind::TopologyGenerationFailed,
              "no connected graph in 100 draws (m = " + std::to_string(m) + ", p = " + std::to_string(p) + ")");
}

Graph line_graph(std::size_t m) {
  if (m < 2) throw Error(ErrorKind::InvalidInput, "line_graph requires m >= 2");
  std::vector<Graph::Edge> edges;
  for (std::size_t i = 0; i + 1 < m; ++i) edges.emplace_back(i, i + 1);
  return Graph(m, std::move(edges));
}

Graph star_graph(std::size_t m) {
  if (m < 2) throw Error(ErrorKind::InvalidInput, "star_graph requires m >= 2");
  std::vector<Graph::Edge> edges;
  for (std::size_t i = 1; i < m; ++i) edges.emplace_back(0, i);
  return Graph(m, std::move(edges));
}

Graph complete_graph(std::size_t m) {
  if (m < 1) throw Error(ErrorKind::InvalidInput, "complete_graph requires m >= 1");
  std::vector<Graph::Edge> edges;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) edges.emplace_back(i, j);
  return Graph(m, std::move(edges));
}

double mixing_rho(const Matrix& W) {
  const auto m = W.rows();
  const Matrix dev = W - Matrix::Constant(m, m, 1.0 / static_cast<double>(m));
  if ((W - W.transpose()).cwiseAbs().maxCoeff() <= 1e-15)
    return symmetric_spectral_norm(0.5 * (dev + dev.transpose()));
  return Eigen::JacobiSVD<Matrix>(dev).singularValues()(0);
}

double stochasticity_error(const Matrix& W) {
  const double rows = (W.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double cols = (W.colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(rows, cols);
}

GossipMatrix GossipMatrix::from_matrix(Matrix W, std::size_t rounds_per_application) {
  if (W.rows() < 1 || W.rows() != W.cols())
    throw Error(ErrorKind::InvalidInput, "gossip matrix must be square and non-empty");
  if (!W.allFinite()) throw Error(ErrorKind::InvalidInput, "gossip matrix must be finite");
  if (rounds_per_application < 1) throw Error(ErrorKind::InvalidInput, "rounds_per_application must be >= 1");
  if (const double err = stochasticity_error(W); err > 1e-12)
    throw Error(ErrorKind::InvalidInput, "gossip matrix is not doubly stochastic (error " + std::to_string(err) + ")");
  GossipMatrix g;
  g.rho = mixing_rho(W);
  if (!(g.rho < 1.0)) throw Error(ErrorKind::InvalidInput, "gossip matrix has rho >= 1");
  g.W = std::move(W);
  g.rounds_per_application = rounds_per_application;
  return g;
}

GossipMatrix metropolis_hastings(const Graph& g) {
  if (!g.connected()) throw Error(ErrorKind::InvalidInput, "metropolis_hastings requires a connected graph");
  const auto m = static_cast<Eigen::Index>(g.nodes());
  const auto deg = g.degrees();
  Matrix W = Matrix::Zero(m, m);
  for (const auto& [i, j] : g.edges()) {
    const double w = 1.0 / (1.0 + static_cast<double>(std::max(deg[i], deg[j])));
    W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
    W(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = w;
  }
  for (Eigen::Index i = 0; i < m; ++i) W(i, i) = 1.0 - W.row(i).sum();
  return GossipMatrix::from_matrix(std::move(W));
}

GossipMatrix exact_averaging(std::size_t m) {
  if (m < 1) throw Error(ErrorKind::InvalidInput, "exact_averaging requires m >= 1");
  const auto n = static_cast<Eigen::Index>(m);
  GossipMatrix g;
  g.W = Matrix::Constant(n, n, 1.0 / static_cast<double>(m));
  g.rho = 0.0;
  g.rounds_per_application = 1;
  return g;
}

GossipMatrix identity_gossip(std::size_t m) {
  const auto n = static_cast<Eigen::Index>(m);
  GossipMatrix g;
  g.W = Matrix::Identity(n, n);
  g.rho = m > 1 ? 1.0 : 0.0;
  g.rounds_per_application = 1;
  return g;
}

namespace {

/// Eigenvalues of a symmetric W restricted to the complement of the ones vector.
EigenRange disagreement_spectrum(const Matrix& W) {
  const auto m = W.rows();
  const Matrix q = Eigen::HouseholderQR<Matrix>(Vector::Ones(m)).householderQ();
  const Matrix basis = q.rightCols(m - 1);
  const Matrix restricted = basis.transpose() * W * basis;
  return symmetric_eigen_range(0.5 * (restricted + restricted.transpose()));
}

/// Symmetrizes and removes the O(eps) drift of row sums while keeping symmetry.
Matrix clean_stochastic(Matrix W) {
  W = 0.5 * (W + W.transpose()).eval();
  for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, i) += 1.0 - W.row(i).sum();
  return W;
}

}  // namespace

double chebyshev_rho_bound(double base_rho, std::size_t M) {
  if (base_rho <= 0.0) return 0.0;
  const double xi = (1.0 - std::sqrt(1.0 - base_rho * base_rho)) / base_rho;
  const double xm = std::pow(xi, static_cast<double>(M));
  return 2.0 * xm / (1.0 + xm * xm);
}

double chebyshev_rho_bound_psd(double base_rho, std::size_t M) {
  if (base_rho <= 0.0) return 0.0;
  const double s = std::sqrt(1.0 - base_rho);
  const double xi = (1.0 - s) / (1.0 + s);
  const double xm = std::pow(xi, static_cast<double>(M));
  return 2.0 * xm / (1.0 + xm * xm);
}

GossipMatrix chebyshev_accelerate(const GossipMatrix& base, std::size_t M) {
  if (M < 1) throw Error(ErrorKind::InvalidInput, "Chebyshev degree must be >= 1");
  if (!(base.rho < 1.0)) throw Error(ErrorKind::InvalidInput, "base rho must be < 1");
  const auto m = base.W.rows();
  if ((base.W - base.W.transpose()).cwiseAbs().maxCoeff() > 1e-14)
    throw Error(ErrorKind::InvalidInput, "Chebyshev acceleration requires a symmetric base");
  const std::size_t rounds = M * base.rounds_per_application;
  if (m == 1 || base.rho == 0.0) return GossipMatrix::from_matrix(base.W, rounds);

  const auto spec = disagreement_spectrum(base.W);
  const double a = spec.min, b = spec.max;
  const Matrix I = Matrix::Identity(m, m);
  Matrix P;
  if (b - a <= 1e-12 * std::max(1.0, std::abs(b))) {
    // Single-point spectrum c: the degree-M polynomial ((x - c)/(1 - c))^M annihilates it.
    const double c = 0.5 * (a + b);
    const Matrix S = (base.W - c * I) / (1.0 - c);
    P = I;
    for (std::size_t k = 0; k < M; ++k) P = S * P;
  } else {
    // P_k = T_k(S)/T_k(z) with S = (2W - (a+b)I)/(b-a), z = (2-a-b)/(b-a).
    // q_k = T_{k+1}(z)/T_k(z) obeys q_0 = z, q_k = 2z - 1/q_{k-1}.
    const Matrix S = (2.0 * base.W - (a + b) * I) / (b - a);
    const double z = (2.0 - a - b) / (b - a);
    Matrix prev = I;
    Matrix cur = S / z;
    double q_prev = z;
    for (std::size_t k = 1; k < M; ++k) {
      const double q = 2.0 * z - 1.0 / q_prev;
      Matrix next = (2.0 / q) * (S * cur) - (1.0 / (q * q_prev)) * prev;
      prev = std::move(cur);
      cur = std::move(next);
      q_prev = q;
    }
    P = std::move(cur);
  }
  GossipMatrix out = GossipMatrix::from_matrix(clean_stochastic(std::move(P)), rounds);
  double bound = chebyshev_rho_bound(base.rho, M);
  if (a >= 0.0) bound = std::min(bound, chebyshev_rho_bound_psd(base.rho, M));
  if (out.rho > bound + 1e-8)
    throw Error(ErrorKind::InvalidInput, "Chebyshev verification failed: measured rho " +
                                             std::to_string(out.rho) + " exceeds bound " + std::to_string(bound));
  return out;
}

std::size_t rounds_for_target(double base_rho, double target_rho) {
  if (!(base_rho >= 0.0 && base_rho < 1.0)) throw Error(ErrorKind::InvalidInput, "base rho must be in [0, 1)");
  if (!(target_rho >= 0.0 && target_rho < 1.0)) throw Error(ErrorKind::InvalidInput, "target rho must be in [0, 1)");
  if (base_rho == 0.0 || target_rho >= base_rho) return 1;
  if (target_rho == 0.0)
    throw Error(ErrorKind::UnreachableTarget, "rho = 0 is reachable only by exact averaging");
  // Closed form from 1/T_M(1/base) <= target, then walk to the exact smallest M.
  const double xi = (1.0 - std::sqrt(1.0 - base_rho * base_rho)) / base_rho;
  const double want = (1.0 - std::sqrt(1.0 - target_rho * target_rho)) / target_rho;
  auto M = static_cast<std::size_t>(std::max(1.0, std::floor(std::log(want) / std::log(xi))));
  while (M > 1 && chebyshev_rho_bound(base_rho, M - 1) <= target_rho) --M;
  while (chebyshev_rho_bound(base_rho, M) > target_rho) ++M;
  return M;
}

GossipMatrix accelerate_to_target(const GossipMatrix& base, double target_rho) {
  if (base.rho <= target_rho) return base;
  std::size_t M = rounds_for_target(base.rho, target_rho);
  for (;; ++M) {
    GossipMatrix g = chebyshev_accelerate(base, M);
    if (g.rho <= target_rho) return g;
  }
}

double line_rho_m(double rho, std::size_t m) {
  return rho / (2.0 + rho) + 2.0 * std::cos(M_PI / static_cast<double>(m)) / (2.0 + rho);
}

Matrix line_weight_matrix(std::size_t m, double a, double rho) {
  const auto n = static_cast<Eigen::Index>(m);
  Matrix L = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double w = i == 0 ? 1.0 - a : 1.0;
    L(i, i + 1) = L(i + 1, i) = -w;
    L(i, i) += w;
    L(i + 1, i + 1) += w;
  }
  return Matrix::Identity(n, n) - L / (2.0 + rho);
}

namespace {

Matrix triangle_weight_matrix(double a) {
  Matrix L = Matrix::Zero(3, 3);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = i + 1; j < 3; ++j) {
      const double w = (i == 0 && j == 1) ? 1.0 - a : 1.0;
      L(i, j) = L(j, i) = -w;
      L(i, i) += w;
      L(j, j) += w;
    }
  return Matrix::Identity(3, 3) - L / 3.0;
}

}  // namespace

LineGossip line_gossip_for_rho(double rho_target, std::size_t max_m) {
  if (!(rho_target > 0.0 && rho_target < 1.0)) throw Error(ErrorKind::InvalidInput, "rho_target must be in (0, 1)");
  std::size_t m = 2;
  while (!(line_rho_m(rho_target, m) < rho_target && rho_target <= line_rho_m(rho_target, m + 1))) {
    ++m;
    if (m > max_m) throw Error(ErrorKind::InstanceTooLarge, "line graph would need more than " + std::to_string(max_m) + " nodes");
  }
  if (m > max_m) throw Error(ErrorKind::InstanceTooLarge, "line graph would need more than " + std::to_string(max_m) + " nodes");

  auto build = [&](double a) { return m >= 3 ? line_weight_matrix(m, a, rho_target) : triangle_weight_matrix(a); };
  // rho(a) increases continuously from rho(0) < target to rho(1) >= target.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mixing_rho(build(mid)) < rho_target) lo = mid; else hi = mid;
  }
  const double a = std::abs(mixing_rho(build(lo)) - rho_target) <= std::abs(mixing_rho(build(hi)) - rho_target) ? lo : hi;

  LineGossip out;
  out.m_index = m;
  out.a = a;
  out.gossip = GossipMatrix::from_matrix(build(a));
  out.graph = m >= 3 ? line_graph(m) : complete_graph(3);
  return out;
}

HardInstanceGroups hard_instance_groups(std::size_t m) {
  // zeta = 1/32: left = {1..ceil(m/32)}, right = {floor(31m/32)+1..m} in 1-based numbering.
  HardInstanceGroups g;
  g.left_end = (m + 31) / 32;
  g.right_begin = (31 * m) / 32;
  return g;
}

ProblemSpec hard_instance(double mu, double beta, std::size_t m, std::size_t d) {
  if (!(mu >= 0.0 && mu < 1.0)) throw Error(ErrorKind::InvalidInput, "mu must be in [0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorKind::InvalidInput, "beta must be in (0, 1)");
  if (d < 4 || d % 2 != 0) throw Error(ErrorKind::InvalidInput, "d must be even and >= 4");
  if (m < 2) throw Error(ErrorKind::InvalidInput, "m must be >= 2");
  const auto groups = hard_instance_groups(m);
  const auto n = static_cast<Eigen::Index>(d);
  const double scale = beta * (1.0 - mu) / 4.0 * static_cast<double>(m) / static_cast<double>(groups.left_end);

  auto add_block = [](Matrix& A, Eigen::Index i) {
    A(i, i) += 1.0;
    if (i + 1 < A.rows()) {
      A(i + 1, i + 1) += 1.0;
      A(i, i + 1) -= 1.0;
      A(i + 1, i) -= 1.0;
    }
  };
  Matrix A1 = Matrix::Zero(n, n), A2 = Matrix::Zero(n, n);
  A1(0, 0) = 1.0;
  for (Eigen::Index i = 1; i < n; i += 2) add_block(A1, i);
  for (Eigen::Index i = 0; i < n; i += 2) add_block(A2, i);

  const Matrix muI = mu * Matrix::Identity(n, n);
  std::vector<QuadraticModel> agents(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& q = agents[i];
    q.linear = Vector::Zero(n);
    if (i < groups.left_end) {
      q.hessian = scale * A1 + muI;
      q.linear(0) = scale;
    } else if (i >= groups.right_begin) {
      q.hessian = scale * A2 + muI;
    } else {
      q.hessian = muI;
    }
  }
  return ProblemSpec::from_quadratics(std::move(agents));
}

std::size_t cut_distance(const Graph& g, const HardInstanceGroups& groups) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < groups.left_end; ++i) {
    const auto dist = g.hop_distances(i);
    for (std::size_t j = groups.right_begin; j < g.nodes(); ++j) best = std::min(best, dist[j]);
  }
  return best;
}

}  // namespace accsim
