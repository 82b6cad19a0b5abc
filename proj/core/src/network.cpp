#include "dsm/network.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace dsm {

CommGraph::CommGraph(std::size_t nodes, std::vector<Edge> edges)
    : edges_(std::move(edges)), adjacency_(nodes) {
  if (nodes == 0) throw std::invalid_argument("graph needs at least one node");
  for (auto& e : edges_) {
    if (e.u >= nodes || e.v >= nodes) {
      throw std::invalid_argument("edge {" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                  "} references a node outside 0.." +
                                  std::to_string(nodes - 1));
    }
    if (e.u == e.v) throw std::invalid_argument("self-loop at node " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.u, x.v) < std::tie(y.u, y.v); });
  if (const auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
    throw std::invalid_argument("duplicate edge {" + std::to_string(dup->u) + "," +
                                std::to_string(dup->v) + "}");
  }
  for (const auto& e : edges_) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
    max_degree_ = std::max(max_degree_, nbrs.size());
  }
  connected_ = is_connected(*this);
}

bool CommGraph::has_edge(std::size_t u, std::size_t v) const {
  const auto& nbrs = adjacency_.at(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

CommGraph CommGraph::complete(std::size_t nodes) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < nodes; ++u)
    for (std::size_t v = u + 1; v < nodes; ++v) edges.push_back({u, v});
  return CommGraph(nodes, std::move(edges));
}

CommGraph CommGraph::path(std::size_t nodes) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u + 1 < nodes; ++u) edges.push_back({u, u + 1});
  return CommGraph(nodes, std::move(edges));
}

CommGraph CommGraph::star(std::size_t nodes) {
  std::vector<Edge> edges;
  for (std::size_t v = 1; v < nodes; ++v) edges.push_back({0, v});
  return CommGraph(nodes, std::move(edges));
}

bool is_connected(const CommGraph& graph) {
  const std::size_t n = graph.size();
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : graph.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

WeightMatrix::WeightMatrix(std::size_t nodes, std::vector<double> entries)
    : nodes_(nodes), w_(std::move(entries)) {
  if (w_.size() != nodes_ * nodes_) throw std::invalid_argument("weight matrix is not N x N");
  for (double w : w_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weights must be finite and nonnegative");
    }
  }
}

double WeightMatrix::row_sum(std::size_t n) const {
  double s = 0.0;
  for (std::size_t k = 0; k < nodes_; ++k) s += (*this)(n, k);
  return s;
}

double WeightMatrix::column_sum(std::size_t k) const {
  double s = 0.0;
  for (std::size_t n = 0; n < nodes_; ++n) s += (*this)(n, k);
  return s;
}

bool WeightMatrix::is_doubly_stochastic(double tol) const {
  for (std::size_t i = 0; i < nodes_; ++i) {
    if (std::abs(row_sum(i) - 1.0) > tol || std::abs(column_sum(i) - 1.0) > tol) return false;
  }
  return nodes_ > 0;
}

bool WeightMatrix::respects(const CommGraph& graph) const {
  if (graph.size() != nodes_) return false;
  for (std::size_t n = 0; n < nodes_; ++n)
    for (std::size_t k = 0; k < nodes_; ++k)
      if (n != k && (*this)(n, k) != 0.0 && !graph.has_edge(n, k)) return false;
  return true;
}

WeightMatrix build_weights(const CommGraph& graph, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("tau must lie in (0, 1), got " + std::to_string(tau));
  }
  if (!graph.connected()) throw std::invalid_argument("mixing weights need a connected graph");
  const std::size_t n = graph.size();
  std::vector<double> w(n * n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return WeightMatrix(1, std::move(w));
  }
  const double off = tau / static_cast<double>(graph.max_degree());
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v : graph.neighbors(u)) w[u * n + v] = off;
    w[u * n + u] = 1.0 - static_cast<double>(graph.degree(u)) * off;
  }
  return WeightMatrix(n, std::move(w));
}

std::vector<GossipEvent> gossip_stream(const CommGraph& graph, std::mt19937_64& rng,
                                       std::size_t count) {
  if (!graph.connected() || graph.size() < 2) {
    throw std::invalid_argument("gossip needs a connected graph with at least two nodes");
  }
  std::vector<GossipEvent> events;
  events.reserve(count);
  std::uniform_int_distribution<std::size_t> pick_node(0, graph.size() - 1);
  for (std::size_t t = 1; t <= count; ++t) {
    const std::size_t i = pick_node(rng);
    const auto nbrs = graph.neighbors(i);
    std::uniform_int_distribution<std::size_t> pick_nbr(0, nbrs.size() - 1);
    events.push_back({t, i, nbrs[pick_nbr(rng)]});
  }
  return events;
}

CommGraph generate_topology(std::size_t nodes, double target_degree, std::mt19937_64& rng) {
  if (nodes < 2) throw std::invalid_argument("topology needs at least two nodes");
  std::vector<std::size_t> order(nodes);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::set<std::pair<std::size_t, std::size_t>> chosen;
  auto add = [&](std::size_t u, std::size_t v) {
    return chosen.insert({std::min(u, v), std::max(u, v)}).second;
  };
  for (std::size_t i = 1; i < nodes; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    add(order[i], order[parent(rng)]);
  }

  const std::size_t max_edges = nodes * (nodes - 1) / 2;
  const auto wanted = std::min<std::size_t>(
      max_edges,
      static_cast<std::size_t>(std::ceil(std::max(0.0, target_degree) * nodes / 2.0)));
  std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
  while (chosen.size() < wanted) {
    const std::size_t u = pick(rng);
    const std::size_t v = pick(rng);
    if (u != v) add(u, v);
  }

  std::vector<Edge> edges;
  edges.reserve(chosen.size());
  for (const auto& [u, v] : chosen) edges.push_back({u, v});
  return CommGraph(nodes, std::move(edges));
}

void write_edge_list(std::ostream& out, const CommGraph& graph) {
  out << "# nodes " << graph.size() << '\n';
  for (const auto& e : graph.edges()) out << e.u + 1 << ' ' << e.v + 1 << '\n';
}

CommGraph read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::size_t declared = 0;
  std::size_t highest = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream header(line.substr(first + 1));
      std::string key;
      std::size_t value = 0;
      if (header >> key && key == "nodes" && header >> value) declared = value;
      continue;
    }
    std::istringstream fields(line);
    long long a = 0;
    long long b = 0;
    std::string rest;
    if (!(fields >> a >> b) || (fields >> rest) || a < 1 || b < 1) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": expected two positive node indices");
    }
    edges.push_back({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1)});
    highest = std::max({highest, static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
  }
  if (declared != 0 && highest > declared) {
    throw std::invalid_argument("edge list references node " + std::to_string(highest) +
                                " beyond declared count " + std::to_string(declared));
  }
  return CommGraph(declared != 0 ? declared : highest, std::move(edges));
}

}  // namespace dsm
