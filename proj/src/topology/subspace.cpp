#include <cmath>

#include <Eigen/QR>

#include "fedleak/topology.hpp"

namespace fedleak::topology {

EdgeSpace::EdgeSpace(const Graph& g, int block)
    : g_(g), m_(g.num_edges()), u_(block) {
  require(block >= 1, "EdgeSpace: block size must be >= 1");
}

int EdgeSpace::slot(NodeId i, NodeId j) const {
  const int e = g_.edge_index(i, j);
  return i < j ? e : e + m_;
}

SubspaceProjector::SubspaceProjector(const Graph& g, int block, double rank_tol)
    : space_(g, block) {
  const int m = g.num_edges();
  const int n = g.num_nodes();
  if (m == 0) {
    basis_ = Mat(0, 0);
    return;
  }
  const Mat c = incidence();
  Mat stacked(2 * m, 2 * n);
  stacked.leftCols(n) = c;
  // P swaps the upper and lower halves.
  stacked.block(0, n, m, n) = c.bottomRows(m);
  stacked.block(m, n, m, n) = c.topRows(m);

  Eigen::ColPivHouseholderQR<Mat> qr(stacked);
  qr.setThreshold(rank_tol);
  rank_ = static_cast<int>(qr.rank());
  Mat q = qr.householderQ();
  basis_ = q.leftCols(rank_);
}

Mat SubspaceProjector::incidence() const {
  const auto& g = space_.graph();
  const int m = g.num_edges();
  Mat c = Mat::Zero(2 * m, g.num_nodes());
  for (int e = 0; e < m; ++e) {
    const auto& edge = g.edges()[e];
    c(e, edge.lo) = 1.0;       // B_{lo|hi} = +I
    c(e + m, edge.hi) = -1.0;  // B_{hi|lo} = -I
  }
  return c;
}

Vec SubspaceProjector::permute(const Vec& z) const {
  require(z.size() == space_.dim(), "permute: dimension mismatch");
  const Eigen::Index half = z.size() / 2;
  Vec out(z.size());
  out.head(half) = z.tail(half);
  out.tail(half) = z.head(half);
  return out;
}

std::pair<Vec, Vec> SubspaceProjector::decompose(const Vec& z) const {
  require(z.size() == space_.dim(), "subspace_decompose: expected dimension " +
                                        std::to_string(space_.dim()) + ", got " +
                                        std::to_string(z.size()));
  const int rows = 2 * space_.num_edges();
  const int u = space_.block();
  // Row-major view: row s is the block of slot s, column k is coordinate k.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      blocks(z.data(), rows, u);
  Mat in_psi = basis_ * (basis_.transpose() * blocks);
  Vec zpsi(z.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      zpsi.data(), rows, u) = in_psi;
  return {zpsi, z - zpsi};
}

Vec SubspaceProjector::project_perp(const Vec& z) const { return decompose(z).second; }

Vec zperp_closed_form(const SubspaceProjector& proj, const Vec& z0, double theta,
                      int t) {
  require(t >= 0, "zperp_closed_form: t must be >= 0");
  require(theta > 0.0 && theta <= 1.0, "zperp_closed_form: theta must lie in (0,1]");
  const Vec zp = proj.project_perp(z0);
  const Vec pz = proj.permute(zp);
  const double decay = std::pow(1.0 - 2.0 * theta, t);
  return 0.5 * (zp + pz) + 0.5 * decay * (zp - pz);
}

}  // namespace fedleak::topology
