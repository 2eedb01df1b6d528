#pragma once

#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedleak/common.hpp"

namespace fedleak::topology {

// Undirected edge stored with lo < hi.
struct Edge {
  NodeId lo;
  NodeId hi;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Undirected simple graph over nodes 0..n-1. Edges are kept sorted, so the
// edge index of a pair is stable for a given edge set.
class Graph {
 public:
  Graph(int n, std::vector<Edge> edges);

  static Graph path(int n);
  static Graph ring(int n);
  static Graph complete(int n);
  static Graph star(int n);

  int num_nodes() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodeId>& neighbors(NodeId i) const { return adj_.at(i); }
  int degree(NodeId i) const { return static_cast<int>(adj_.at(i).size()); }
  bool has_edge(NodeId i, NodeId j) const;
  // Index into edges() of the undirected pair; throws for a non-edge.
  int edge_index(NodeId i, NodeId j) const;
  bool connected() const;

  // "n m" header followed by m lines "i j", sorted.
  std::string to_edge_list() const;
  static Graph from_edge_list(std::string_view text);

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adj_;
};

// Places n nodes uniformly in the unit square (or the unit cube when
// dims = 3) and links pairs at distance <= radius. Redraws the placement until
// the graph is connected; throws after max_retries failed draws.
Graph random_geometric_graph(int n, double radius, std::mt19937_64& rng,
                             int max_retries = 100, int dims = 2);

// Radius sqrt(2 log n / n), connected with high probability.
double default_rgg_radius(int n);

// +1 if i < j, -1 otherwise (B_{i|j} = sign * I). Throws for non-edges.
int edge_sign(const Graph& g, NodeId i, NodeId j);

struct HonestPartition {
  std::vector<NodeId> corrupt;
  std::vector<NodeId> honest;
  // Connected components of the honest-induced subgraph, each sorted, ordered
  // by smallest member.
  std::vector<std::vector<NodeId>> honest_components;
  std::vector<Edge> honest_edges;
  std::vector<Edge> corrupt_edges;

  bool is_corrupt(NodeId i) const;
  // Index of the honest component containing i, or -1 for corrupt nodes.
  int component_of(NodeId i) const;
  std::vector<NodeId> honest_neighbors(const Graph& g, NodeId i) const;
  std::vector<NodeId> corrupt_neighbors(const Graph& g, NodeId i) const;
};

HonestPartition honest_partition(const Graph& g, std::span<const NodeId> corrupt);

// Layout of the stacked auxiliary vector z (dimension 2*m*u). The first m
// blocks hold z_{i|j} with i < j (edge order), the last m blocks the reverse
// orientation z_{j|i}, matching C = [B+; B-].
class EdgeSpace {
 public:
  EdgeSpace(const Graph& g, int block);

  int num_edges() const { return m_; }
  int block() const { return u_; }
  int dim() const { return 2 * m_ * u_; }
  // Block index (0..2m-1) of z_{i|j}.
  int slot(NodeId i, NodeId j) const;
  // Slot holding the opposite orientation.
  int partner(int slot) const { return slot < m_ ? slot + m_ : slot - m_; }
  Eigen::Index offset(NodeId i, NodeId j) const {
    return static_cast<Eigen::Index>(slot(i, j)) * u_;
  }
  const Graph& graph() const { return g_; }

 private:
  Graph g_;
  int m_;
  int u_;
};

// Orthogonal decomposition of edge-space vectors into Psi = ran(C) + ran(PC)
// and its complement. All operators act blockwise (Kronecker with I_u), so
// the basis is built once on the scalar 2m x 2n matrix [C | PC].
class SubspaceProjector {
 public:
  explicit SubspaceProjector(const Graph& g, int block = 1,
                             double rank_tol = 1e-10);

  const EdgeSpace& space() const { return space_; }
  int rank() const { return rank_; }
  // Dimension of Psi-perp in the full (blocked) edge space.
  int perp_dim() const { return (2 * space_.num_edges() - rank_) * space_.block(); }

  // Returns (z_Psi, z_Psi_perp).
  std::pair<Vec, Vec> decompose(const Vec& z) const;
  Vec project_perp(const Vec& z) const;
  // P: swaps the two orientations of every edge.
  Vec permute(const Vec& z) const;
  // Scalar C (2m x n) and the orthonormal basis of Psi (2m x rank).
  Mat incidence() const;
  const Mat& psi_basis() const { return basis_; }

 private:
  EdgeSpace space_;
  int rank_ = 0;
  Mat basis_;
};

// z_perp^{(t)} = 1/2 (zp + P zp) + 1/2 (1 - 2 theta)^t (zp - P zp) with zp
// the Psi-perp component of z0.
Vec zperp_closed_form(const SubspaceProjector& proj, const Vec& z0, double theta,
                      int t);

}  // namespace fedleak::topology
