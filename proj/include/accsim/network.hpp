#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "accsim/linalg.hpp"
#include "accsim/problems.hpp"

namespace accsim {

/// Undirected simple graph on nodes 0..m-1. Self-loops are implicit.
class Graph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  Graph() = default;
  /// Normalizes every edge to (min, max), sorts and deduplicates.
  Graph(std::size_t m, std::vector<Edge> edges);

  std::size_t nodes() const noexcept { return m_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool has_edge(std::size_t i, std::size_t j) const;
  std::vector<std::size_t> degrees() const;
  /// Union-find connectivity test.
  bool connected() const;
  /// BFS hop distances from `source`; unreachable nodes get SIZE_MAX.
  std::vector<std::size_t> hop_distances(std::size_t source) const;

 private:
  std::size_t m_ = 0;
  std::vector<Edge> edges_;
};

/// Each pair included with probability p; resampled from a fresh sub-stream
/// until connected (at most 100 draws).
Graph erdos_renyi(std::size_t m, double p, std::uint64_t seed);
Graph line_graph(std::size_t m);
/// Hub is node 0.
Graph star_graph(std::size_t m);
Graph complete_graph(std::size_t m);

/// Doubly stochastic mixing matrix with its cached ||W - 11'/m||_2.
struct GossipMatrix {
  Matrix W;
  double rho = 0.0;
  /// Physical communication rounds spent per multiplication by W.
  std::size_t rounds_per_application = 1;

  std::size_t nodes() const { return static_cast<std::size_t>(W.rows()); }

  /// Computes rho and validates stochasticity (1e-12) and rho < 1.
  static GossipMatrix from_matrix(Matrix W, std::size_t rounds_per_application = 1);
};

/// ||W - 11'/m||_2: symmetric eigensolve for symmetric W, SVD otherwise.
double mixing_rho(const Matrix& W);

/// Largest absolute deviation of row and column sums from 1.
double stochasticity_error(const Matrix& W);

GossipMatrix metropolis_hastings(const Graph& g);
GossipMatrix exact_averaging(std::size_t m);
/// The identity; never mixes. Useful only in tests.
GossipMatrix identity_gossip(std::size_t m);

/// Degree-M Chebyshev polynomial of a symmetric base matrix, optimal over the
/// measured spectral interval [a, b] of the base restricted to 1-perp:
///   P_M(x) = T_M((2x - a - b)/(b - a)) / T_M((2 - a - b)/(b - a)).
/// P_M(1) = 1 by construction; the polynomial is evaluated with a normalized
/// three-term recurrence so large M never overflows.
GossipMatrix chebyshev_accelerate(const GossipMatrix& base, std::size_t M);

/// Guaranteed rho of chebyshev_accelerate for any symmetric base with
/// spectrum in [-base_rho, base_rho]: 1/T_M(1/base_rho) = 2 xi^M / (1 + xi^{2M})
/// with xi = (1 - sqrt(1 - base_rho^2)) / base_rho.
double chebyshev_rho_bound(double base_rho, std::size_t M);

/// Tighter bound for a positive semidefinite base (spectrum in [0, base_rho]):
/// 2 xi^M / (1 + xi^{2M}) with xi = (1 - sqrt(1 - base_rho)) / (1 + sqrt(1 - base_rho)).
double chebyshev_rho_bound_psd(double base_rho, std::size_t M);

/// Smallest M whose guaranteed Chebyshev rho is <= target_rho.
std::size_t rounds_for_target(double base_rho, double target_rho);

/// rounds_for_target followed by chebyshev_accelerate, increasing M until the
/// spectrally measured rho is <= target_rho.
GossipMatrix accelerate_to_target(const GossipMatrix& base, double target_rho);

/// rho_m = rho/(2+rho) + 2 cos(pi/m)/(2+rho).
double line_rho_m(double rho, std::size_t m);

/// Gossip matrix of a prescribed rho on the lower-bound topology.
struct LineGossip {
  GossipMatrix gossip;
  Graph graph;
  std::size_t m_index = 0;  // the m with rho_m < rho <= rho_{m+1}
  double a = 0.0;           // weight defect of the edge between nodes 0 and 1
};

/// m >= 3: path on m nodes, W = I - L_{m,a}/(2+rho) with the first edge
/// weighted 1 - a. m = 2: complete graph on 3 nodes, W = I - L_a/3 with edge
/// (0,1) weighted 1 - a. `a` is bisected until rho matches within 1e-9.
LineGossip line_gossip_for_rho(double rho_target, std::size_t max_m);

/// Weight matrix I - L/(2+rho) for a path on m nodes whose first edge has weight 1 - a.
Matrix line_weight_matrix(std::size_t m, double a, double rho);

/// Agent groups of the lower-bound instance (0-based, half-open ranges).
struct HardInstanceGroups {
  std::size_t left_end = 0;     // left group is [0, left_end)
  std::size_t right_begin = 0;  // right group is [right_begin, m)
};

HardInstanceGroups hard_instance_groups(std::size_t m);

/// Quadratic lower-bound instance truncated to dimension d. Left agents hold
/// s A1 + mu I with linear term s e1, right agents s A2 + mu I, the rest mu I,
/// with s = beta (1 - mu) m / (4 ceil(m/32)).
ProblemSpec hard_instance(double mu, double beta, std::size_t m, std::size_t d);

/// Hop distance between the two outer groups on `g`.
std::size_t cut_distance(const Graph& g, const HardInstanceGroups& groups);

}  // namespace accsim
