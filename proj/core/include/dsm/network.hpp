#pragma once

// Consumer communication topology, consensus mixing weights and the
// pairwise gossip event stream.

#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace dsm {

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected simple graph on nodes 0..N-1. Construction rejects self-loops,
/// duplicate edges and out-of-range endpoints; connectivity is evaluated once
/// and exposed through connected().
class CommGraph {
 public:
  CommGraph(std::size_t nodes, std::vector<Edge> edges);

  std::size_t size() const noexcept { return adjacency_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const std::size_t> neighbors(std::size_t n) const { return adjacency_.at(n); }
  std::size_t degree(std::size_t n) const { return adjacency_.at(n).size(); }
  std::size_t max_degree() const noexcept { return max_degree_; }
  bool connected() const noexcept { return connected_; }
  bool has_edge(std::size_t u, std::size_t v) const;

  static CommGraph complete(std::size_t nodes);
  static CommGraph path(std::size_t nodes);
  static CommGraph star(std::size_t nodes);

  friend bool operator==(const CommGraph& x, const CommGraph& y) {
    return x.size() == y.size() && x.edges_ == y.edges_;
  }

 private:
  std::vector<Edge> edges_;  // normalised u < v, sorted
  std::vector<std::vector<std::size_t>> adjacency_;
  std::size_t max_degree_ = 0;
  bool connected_ = false;
};

/// Breadth-first reachability from node 0.
bool is_connected(const CommGraph& graph);

/// Dense N x N mixing matrix.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  /// Row-major entries; throws std::invalid_argument on size mismatch or negative entries.
  WeightMatrix(std::size_t nodes, std::vector<double> entries);

  std::size_t size() const noexcept { return nodes_; }
  double operator()(std::size_t n, std::size_t k) const { return w_[n * nodes_ + k]; }
  double row_sum(std::size_t n) const;
  double column_sum(std::size_t k) const;
  bool is_doubly_stochastic(double tol) const;
  /// True when every off-diagonal non-zero sits on an edge of the graph.
  bool respects(const CommGraph& graph) const;

 private:
  std::size_t nodes_ = 0;
  std::vector<double> w_;
};

/// w_nk = tau / max degree on edges, w_nn = 1 - deg(n) tau / max degree.
/// Throws std::invalid_argument unless 0 < tau < 1 and the graph is connected.
WeightMatrix build_weights(const CommGraph& graph, double tau);

struct GossipEvent {
  std::size_t t = 0;          ///< 1-based event index
  std::size_t initiator = 0;  ///< node whose clock ticked
  std::size_t contact = 0;    ///< neighbour chosen uniformly

  friend bool operator==(const GossipEvent&, const GossipEvent&) = default;
};

/// Single virtual clock: the ticking node is uniform over all nodes and the
/// contacted neighbour uniform over its neighbourhood. Only the event order is
/// materialised, not the arrival times. Requires a connected graph, N >= 2.
std::vector<GossipEvent> gossip_stream(const CommGraph& graph, std::mt19937_64& rng,
                                       std::size_t count);

/// Random spanning tree plus extra uniform edges until the mean degree
/// reaches target_degree (or the graph is complete).
CommGraph generate_topology(std::size_t nodes, double target_degree, std::mt19937_64& rng);

/// Edge-list text: optional "# nodes N" header, then one "n k" pair per line,
/// 1-indexed. Lines starting with '#' are otherwise ignored.
void write_edge_list(std::ostream& out, const CommGraph& graph);
CommGraph read_edge_list(std::istream& in);

}  // namespace dsm
