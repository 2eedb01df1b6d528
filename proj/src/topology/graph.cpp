#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fedleak/topology.hpp"

namespace fedleak::topology {

Graph::Graph(int n, std::vector<Edge> edges) : n_(n), adj_(n) {
  require(n >= 1, "graph needs at least one node");
  for (auto& e : edges) {
    require(e.lo != e.hi, "self loop on node " + std::to_string(e.lo));
    if (e.lo > e.hi) std::swap(e.lo, e.hi);
    require(e.lo >= 0 && e.hi < n, "edge endpoint out of range");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  for (const auto& e : edges_) {
    adj_[e.lo].push_back(e.hi);
    adj_[e.hi].push_back(e.lo);
  }
  for (auto& a : adj_) std::sort(a.begin(), a.end());
}

Graph Graph::path(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return Graph(n, std::move(e));
}

Graph Graph::ring(int n) {
  require(n >= 3, "ring needs at least 3 nodes");
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
  return Graph(n, std::move(e));
}

Graph Graph::complete(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j});
  return Graph(n, std::move(e));
}

Graph Graph::star(int n) {
  std::vector<Edge> e;
  for (int i = 1; i < n; ++i) e.push_back({0, i});
  return Graph(n, std::move(e));
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j) return false;
  const auto& a = adj_[i];
  return std::binary_search(a.begin(), a.end(), j);
}

int Graph::edge_index(NodeId i, NodeId j) const {
  require(has_edge(i, j),
          "(" + std::to_string(i) + "," + std::to_string(j) + ") is not an edge");
  Edge key{std::min(i, j), std::max(i, j)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  return static_cast<int>(it - edges_.begin());
}

bool Graph::connected() const {
  std::vector<char> seen(n_, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : adj_[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n_;
}

std::string Graph::to_edge_list() const {
  std::ostringstream os;
  os << n_ << ' ' << edges_.size() << '\n';
  for (const auto& e : edges_) os << e.lo << ' ' << e.hi << '\n';
  return os.str();
}

Graph Graph::from_edge_list(std::string_view text) {
  std::istringstream is{std::string(text)};
  long n = 0, m = 0;
  if (!(is >> n >> m) || n < 1 || m < 0) throw Error("edge list: bad header");
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(m));
  for (long k = 0; k < m; ++k) {
    long i = 0, j = 0;
    if (!(is >> i >> j)) throw Error("edge list: truncated at edge " + std::to_string(k));
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
  }
  Graph g(static_cast<int>(n), std::move(edges));
  if (g.num_edges() != m) throw Error("edge list: duplicate edges");
  return g;
}

double default_rgg_radius(int n) {
  return std::sqrt(2.0 * std::log(static_cast<double>(n)) / n);
}

Graph random_geometric_graph(int n, double radius, std::mt19937_64& rng,
                             int max_retries, int dims) {
  require(n >= 2, "random_geometric_graph: n must be >= 2");
  require(dims == 2 || dims == 3, "random_geometric_graph: dims must be 2 or 3");
  const double diameter = std::sqrt(static_cast<double>(dims));
  require(radius > 0.0 && radius <= diameter,
          "random_geometric_graph: radius must lie in (0, sqrt(dims)]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r2 = radius * radius;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    std::vector<std::array<double, 3>> pos(n, {0.0, 0.0, 0.0});
    for (auto& p : pos)
      for (int d = 0; d < dims; ++d) p[d] = unit(rng);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double d2 = 0.0;
        for (int d = 0; d < dims; ++d) d2 += (pos[i][d] - pos[j][d]) * (pos[i][d] - pos[j][d]);
        // radius = diameter must always link opposite corners
        if (d2 <= r2 * (1.0 + 1e-12)) edges.push_back({i, j});
      }
    }
    Graph g(n, std::move(edges));
    if (g.connected()) return g;
  }
  throw Error("random_geometric_graph: no connected draw after " +
              std::to_string(max_retries) + " retries (radius " +
              std::to_string(radius) + " too small for n=" + std::to_string(n) + ")");
}

int edge_sign(const Graph& g, NodeId i, NodeId j) {
  require(g.has_edge(i, j), "edge_sign: (" + std::to_string(i) + "," +
                                std::to_string(j) + ") is not an edge");
  return i < j ? 1 : -1;
}

bool HonestPartition::is_corrupt(NodeId i) const {
  return std::binary_search(corrupt.begin(), corrupt.end(), i);
}

int HonestPartition::component_of(NodeId i) const {
  for (size_t c = 0; c < honest_components.size(); ++c) {
    const auto& comp = honest_components[c];
    if (std::binary_search(comp.begin(), comp.end(), i)) return static_cast<int>(c);
  }
  return -1;
}

std::vector<NodeId> HonestPartition::honest_neighbors(const Graph& g, NodeId i) const {
  std::vector<NodeId> out;
  for (NodeId j : g.neighbors(i))
    if (!is_corrupt(j)) out.push_back(j);
  return out;
}

std::vector<NodeId> HonestPartition::corrupt_neighbors(const Graph& g, NodeId i) const {
  std::vector<NodeId> out;
  for (NodeId j : g.neighbors(i))
    if (is_corrupt(j)) out.push_back(j);
  return out;
}

HonestPartition honest_partition(const Graph& g, std::span<const NodeId> corrupt) {
  const int n = g.num_nodes();
  HonestPartition p;
  std::vector<char> bad(n, 0);
  for (NodeId c : corrupt) {
    require(c >= 0 && c < n, "honest_partition: corrupt node out of range");
    bad[c] = 1;
  }
  for (int i = 0; i < n; ++i) (bad[i] ? p.corrupt : p.honest).push_back(i);
  for (const auto& e : g.edges())
    (bad[e.lo] || bad[e.hi] ? p.corrupt_edges : p.honest_edges).push_back(e);

  // Scanning nodes in increasing id order yields components ordered by their
  // smallest member.
  std::vector<char> seen(n, 0);
  for (NodeId s : p.honest) {
    if (seen[s]) continue;
    std::vector<NodeId> comp;
    std::vector<NodeId> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (NodeId w : g.neighbors(v)) {
        if (!bad[w] && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    p.honest_components.push_back(std::move(comp));
  }
  return p;
}

}  // namespace fedleak::topology
