#include "fedleak/adversary/view.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>

namespace fedleak::adversary {

using protocols::Message;
using protocols::PayloadKind;

namespace {

double sign_of(NodeId i, NodeId j) { return i < j ? 1.0 : -1.0; }

bool is_gd(const ProtocolParams& p) {
  return p.solver.kind == protocols::LocalSolver::Kind::SingleStepGD;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

}  // namespace

AdversaryView::AdversaryView(Mode mode, const protocols::Transcript& transcript,
                             const topology::Graph& g, std::span<const NodeId> corrupt,
                             CorruptKnowledge internal)
    : mode_(mode),
      space_(g, 1),
      partition_(topology::honest_partition(g, corrupt)),
      internal_(std::move(internal)) {
  int block = -1;
  int horizon = 0;
  for (const Message& m : transcript.records()) {
    if (m.kind != PayloadKind::DeltaZ && m.kind != PayloadKind::InitZ)
      throw Error("adversary view: transcript contains non-DFL record kind " +
                  std::string(protocols::to_string(m.kind)));
    require(g.has_edge(m.sender, m.receiver),
            "adversary view: record between non-adjacent nodes " + std::to_string(m.sender) +
                " and " + std::to_string(m.receiver));
    if (block < 0) block = static_cast<int>(m.payload.size());
    require(m.payload.size() == block, "adversary view: payload sizes disagree");
    if (m.kind == PayloadKind::DeltaZ) horizon = std::max(horizon, m.t);
  }
  require(block > 0, "adversary view: transcript has no records");
  require(horizon >= 1, "adversary view: transcript has no Delta z rounds");
  space_ = topology::EdgeSpace(g, block);

  const Eigen::Index dim = space_.dim();
  std::vector<std::vector<bool>> seen(horizon, std::vector<bool>(2 * g.num_edges(), false));
  delta_.assign(horizon, Vec::Zero(dim));
  z0_.assign(2 * g.num_edges(), std::nullopt);

  for (const Message& m : transcript.records()) {
    const bool inside = partition_.is_corrupt(m.sender) || partition_.is_corrupt(m.receiver);
    if (m.secure && !inside) continue;
    visible_.push_back(m);
    if (m.kind == PayloadKind::InitZ) {
      // payload is z_{sender|receiver}^{(0)}
      z0_[space_.slot(m.sender, m.receiver)] = m.payload;
    } else {
      require(m.t >= 1, "adversary view: Delta z record with t < 1");
      const int slot = space_.slot(m.receiver, m.sender);
      require(!seen[m.t - 1][slot], "adversary view: duplicate Delta z record");
      seen[m.t - 1][slot] = true;
      delta_[m.t - 1].segment(space_.offset(m.receiver, m.sender), block) = m.payload;
    }
  }
  for (int t = 0; t < horizon; ++t)
    for (bool s : seen[t])
      require(s, "adversary view: missing Delta z record for round " + std::to_string(t + 1));

  cumulative_.reserve(horizon);
  Vec acc = Vec::Zero(dim);
  for (const Vec& d : delta_) {
    acc += d;
    cumulative_.push_back(acc);
  }
}

AdversaryView AdversaryView::eavesdropper(const protocols::Transcript& transcript,
                                          const topology::Graph& g) {
  return AdversaryView(Mode::Eavesdropper, transcript, g, {}, {});
}

AdversaryView AdversaryView::passive(const protocols::Transcript& transcript,
                                     const topology::Graph& g, std::span<const NodeId> corrupt,
                                     CorruptKnowledge internal) {
  for (const auto& [id, obj] : internal.objectives)
    require(std::find(corrupt.begin(), corrupt.end(), id) != corrupt.end(),
            "adversary view: internal state given for honest node " + std::to_string(id));
  return AdversaryView(Mode::Passive, transcript, g, corrupt, std::move(internal));
}

Eigen::Ref<const Vec> AdversaryView::delta_z(NodeId j, NodeId i, int t) const {
  require(t >= 1 && t <= horizon(), "delta_z: round " + std::to_string(t) + " not observed");
  return delta_[t - 1].segment(space_.offset(j, i), space_.block());
}

Vec AdversaryView::accumulated_delta(NodeId j, NodeId i, int t) const {
  require(t >= 0 && t <= horizon(), "accumulated_delta: round out of range");
  if (t == 0) return Vec::Zero(space_.block());
  return cumulative_[t - 1].segment(space_.offset(j, i), space_.block());
}

std::optional<Vec> AdversaryView::known_z0(NodeId i, NodeId j) const {
  return z0_[space_.slot(i, j)];
}

double observed_consensus_residual(const AdversaryView& view, const ProtocolParams& params) {
  const int T = view.horizon();
  double worst = 0.0;
  for (const auto& e : view.graph().edges()) {
    const Vec gap = (view.delta_z(e.hi, e.lo, T) + view.delta_z(e.lo, e.hi, T)) /
                    (2.0 * params.rho * params.theta);
    worst = std::max(worst, gap.norm());
  }
  return worst;
}

Vec weight_increment(const AdversaryView& view, const ProtocolParams& params, NodeId i, int t,
                     std::optional<NodeId> via) {
  const auto& g = view.graph();
  require(i >= 0 && i < g.num_nodes(), "weight_increment: node out of range");
  require(t >= 1 && t <= view.horizon() - 1,
          "weight_increment: t must lie in [1, T-1], got " + std::to_string(t));
  require(g.degree(i) > 0, "weight_increment: isolated node " + std::to_string(i));
  const NodeId j = via.value_or(g.neighbors(i).front());
  require(g.has_edge(i, j), "weight_increment: via node is not a neighbor");

  const auto next = view.delta_z(j, i, t + 1);
  const auto cur = view.delta_z(j, i, t);
  const auto back = view.delta_z(i, j, t);
  Vec scaled;
  if (params.theta == 1.0)
    scaled = next - back;
  else
    scaled = (next - cur) / params.theta - back + cur;
  return scaled / (2.0 * params.rho * sign_of(i, j));
}

namespace {

// Spreads one node's terminal weight over the graph using the observed
// last-round gaps (Delta z_{hi|lo} + Delta z_{lo|hi}) / (2 rho theta) = w_lo - w_hi.
std::vector<Vec> per_node_terminal(const AdversaryView& view, const ProtocolParams& params,
                                   const Vec& anchor, NodeId owner) {
  const auto& g = view.graph();
  const int n = g.num_nodes();
  if (owner < 0 || owner >= n)
    throw Error("recover_weights: per-node anchors need the id of the node holding the anchor");
  const int T = view.horizon();
  const double scale = 1.0 / (2.0 * params.rho * params.theta);
  std::vector<Vec> out(n);
  std::vector<bool> seen(n, false);
  std::deque<NodeId> queue{owner};
  out[owner] = anchor;
  seen[owner] = true;
  while (!queue.empty()) {
    const NodeId i = queue.front();
    queue.pop_front();
    for (NodeId j : g.neighbors(i)) {
      if (seen[j]) continue;
      // gap = w_i - w_j up to the edge orientation.
      const Vec gap = (view.delta_z(j, i, T) + view.delta_z(i, j, T)) * scale;
      out[j] = i < j ? Vec(out[i] - gap) : Vec(out[i] + gap);
      seen[j] = true;
      queue.push_back(j);
    }
  }
  for (NodeId i = 0; i < n; ++i)
    if (!seen[i]) throw Error(fmt("recover_weights: node %d is not reachable from the anchor", i));
  return out;
}

}  // namespace

WeightTable recover_weights(const AdversaryView& view, const ProtocolParams& params,
                            const RecoveryOptions& opts) {
  std::optional<Vec> anchor = opts.anchor;
  if (!anchor) anchor = view.internal().terminal_weight;
  if (!anchor)
    throw Error("recover_weights: anchor unavailable (no terminal weight held by the adversary)");
  require(anchor->size() == view.block(), "recover_weights: anchor has wrong dimension");

  const int T = view.horizon();
  const int n = view.graph().num_nodes();
  WeightTable w(T, std::vector<Vec>(n));
  if (opts.per_node_anchors) {
    w[T - 1] = per_node_terminal(view, params, *anchor,
                                 opts.anchor_node.value_or(view.internal().terminal_owner));
  } else {
    const double residual = observed_consensus_residual(view, params);
    if (!(residual <= opts.consensus_tol))
      throw Error(fmt("recover_weights: anchor unavailable, run has not converged "
                      "(consensus residual %.3g > %.3g)",
                      residual, opts.consensus_tol));
    for (NodeId i = 0; i < n; ++i) w[T - 1][i] = *anchor;
  }
  for (int t = T - 1; t >= 1; --t)
    for (NodeId i = 0; i < n; ++i) w[t - 1][i] = w[t][i] - weight_increment(view, params, i, t);
  return w;
}

std::vector<Vec> z0_differences(const AdversaryView& view, const ProtocolParams& params,
                                const WeightTable& weights) {
  require(!weights.empty(), "z0_differences: no recovered weights");
  std::vector<Vec> out;
  out.reserve(view.graph().num_edges());
  for (const auto& e : view.graph().edges())
    out.push_back(view.delta_z(e.hi, e.lo, 1) / params.theta -
                  2.0 * params.rho * weights[0][e.lo]);
  return out;
}

// ---------------------------------------------------------------------------

ObservableExtractor::ObservableExtractor(const AdversaryView& view, ProtocolParams params,
                                         NoWeights)
    : view_(&view), params_(params) {
  check_extractable();
}

ObservableExtractor::ObservableExtractor(const AdversaryView& view, ProtocolParams params,
                                         const RecoveryOptions& opts)
    : ObservableExtractor(view, params, NoWeights{}) {
  weights_ = recover_weights(view, params, opts);
  z0_diffs_ = z0_differences(view, params, weights_);
}

ObservableExtractor ObservableExtractor::differences_only(const AdversaryView& view,
                                                          ProtocolParams params) {
  return ObservableExtractor(view, params, NoWeights{});
}

void ObservableExtractor::check_extractable() const {
  require(params_.rho > 0.0 && params_.theta > 0.0 && params_.theta <= 1.0,
          "observables: rho must be positive and theta in (0,1]");
  switch (params_.solver.kind) {
    case protocols::LocalSolver::Kind::ExactQuadratic:
      return;
    case protocols::LocalSolver::Kind::SingleStepGD:
      require(params_.solver.mu > 0.0, "observables: single-step solver needs mu > 0");
      return;
    case protocols::LocalSolver::Kind::QuadraticApprox:
      throw Error("observables: extraction is not supported for the quadratic_approx solver");
  }
}

const WeightTable& ObservableExtractor::weights() const {
  require(has_weights(), "observables: absolute weights were not recovered");
  return weights_;
}

const std::vector<Vec>& ObservableExtractor::z0_diffs() const {
  require(has_weights(), "observables: z0 differences need recovered weights");
  return z0_diffs_;
}

int ObservableExtractor::noisy_gradient_end() const {
  return view_->horizon() - (is_gd(params_) ? 1 : 0);
}

int ObservableExtractor::gradient_difference_first() const { return 0; }

int ObservableExtractor::gradient_difference_end() const {
  return view_->horizon() - (is_gd(params_) ? 2 : 1);
}

// sum_{j corrupt} B z_{i|j}^{(t)} + sum_{j honest} B (z_{i|j}^{(t)} - z_{i|j}^{(0)})
Vec ObservableExtractor::coupling_sum(NodeId i, int t) const {
  const auto& g = view_->graph();
  const auto& part = view_->partition();
  Vec acc = Vec::Zero(view_->block());
  for (NodeId j : g.neighbors(i)) {
    Vec z = view_->accumulated_delta(i, j, t);
    if (part.is_corrupt(j)) {
      const auto z0 = view_->known_z0(i, j);
      require(z0.has_value(), "observables: missing z0 on a corrupt edge");
      z += *z0;
    }
    acc += sign_of(i, j) * z;
  }
  return acc;
}

Vec ObservableExtractor::noisy_gradient(NodeId i, int t) const {
  const auto& part = view_->partition();
  require(i >= 0 && i < view_->graph().num_nodes() && !part.is_corrupt(i),
          "noisy_gradient: node must be honest");
  require(t >= 0 && t < noisy_gradient_end(),
          "noisy_gradient: t out of range, got " + std::to_string(t));
  const auto& w = weights();
  const double rd = params_.rho * view_->graph().degree(i);
  if (is_gd(params_)) {
    return (w[t][i] - w[t + 1][i]) / params_.solver.mu - rd * w[t][i] - coupling_sum(i, t + 1);
  }
  return -(coupling_sum(i, t) + rd * w[t][i]);
}

Vec ObservableExtractor::gradient_difference(NodeId i, int t) const {
  const auto& g = view_->graph();
  require(i >= 0 && i < g.num_nodes() && !view_->partition().is_corrupt(i),
          "gradient_difference: node must be honest");
  require(t >= gradient_difference_first() && t < gradient_difference_end(),
          "gradient_difference: t out of range, got " + std::to_string(t));
  const double rd = params_.rho * g.degree(i);
  const int zt = is_gd(params_) ? t + 2 : t + 1;
  Vec bdz = Vec::Zero(view_->block());
  for (NodeId j : g.neighbors(i)) bdz += sign_of(i, j) * view_->delta_z(i, j, zt);

  const Vec dw1 = weight_increment(*view_, params_, i, t + 1);
  if (is_gd(params_)) {
    const double inv_mu = 1.0 / params_.solver.mu;
    const Vec dw2 = weight_increment(*view_, params_, i, t + 2);
    return -inv_mu * dw2 + (inv_mu - rd) * dw1 - bdz;
  }
  return -(bdz + rd * dw1);
}

Vec ObservableExtractor::component_gradient_sum(int l, int t) const {
  const auto& part = view_->partition();
  require(l >= 0 && l < static_cast<int>(part.honest_components.size()),
          "component_gradient_sum: component index out of range");
  const auto& comp = part.honest_components[l];
  Vec acc = Vec::Zero(view_->block());
  for (NodeId j : comp) acc += noisy_gradient(j, t);
  const auto& g = view_->graph();
  const auto& diffs = z0_diffs();
  for (const auto& e : part.honest_edges)
    if (part.component_of(e.lo) == l) acc -= diffs[g.edge_index(e.lo, e.hi)];
  return acc;
}

Observables assemble_observables(const AdversaryView& view, const ProtocolParams& params,
                                 const RecoveryOptions& opts) {
  ObservableExtractor ex(view, params, opts);
  Observables out;
  out.recovered_w = ex.weights();
  out.z0_diffs = ex.z0_diffs();
  out.diff_first = ex.gradient_difference_first();
  const int n = view.graph().num_nodes();
  const auto& part = view.partition();
  out.noisy_gradients.resize(n);
  out.gradient_diffs.resize(n);
  for (NodeId i : part.honest) {
    for (int t = 0; t < ex.noisy_gradient_end(); ++t)
      out.noisy_gradients[i].push_back(ex.noisy_gradient(i, t));
    for (int t = ex.gradient_difference_first(); t < ex.gradient_difference_end(); ++t)
      out.gradient_diffs[i].push_back(ex.gradient_difference(i, t));
  }
  out.component_sums.resize(part.honest_components.size());
  for (size_t l = 0; l < part.honest_components.size(); ++l)
    for (int t = 0; t < ex.noisy_gradient_end(); ++t)
      out.component_sums[l].push_back(ex.component_gradient_sum(static_cast<int>(l), t));
  return out;
}

CflKnowledge cfl_view(const protocols::Transcript& transcript) {
  int n = 0;
  int horizon = 0;
  for (const Message& m : transcript.records()) {
    if (m.kind == PayloadKind::Gradient) {
      require(m.receiver == protocols::kServer, "cfl_view: gradient not addressed to server");
      n = std::max(n, m.sender + 1);
      horizon = std::max(horizon, m.t + 1);
    } else if (m.kind == PayloadKind::GlobalModel) {
      n = std::max(n, m.receiver + 1);
    } else {
      throw Error("cfl_view: transcript contains non-CFL record kind " +
                  std::string(protocols::to_string(m.kind)));
    }
  }
  require(n > 0 && horizon > 0, "cfl_view: transcript holds no gradient rounds");
  CflKnowledge out;
  out.gradients.assign(horizon, std::vector<Vec>(n));
  out.weights.assign(horizon + 1, std::vector<Vec>(n));
  for (const Message& m : transcript.records()) {
    if (m.kind == PayloadKind::Gradient) {
      out.gradients[m.t][m.sender] = m.payload;
    } else {
      require(m.t >= 0 && m.t <= horizon, "cfl_view: model broadcast outside the run");
      out.weights[m.t][m.receiver] = m.payload;
    }
  }
  for (const auto& row : out.gradients)
    for (const Vec& v : row) require(v.size() > 0, "cfl_view: missing gradient record");
  return out;
}

std::vector<Vec> cfl_unwind(const Vec& terminal, const CflKnowledge& known, double mu) {
  const int T = static_cast<int>(known.gradients.size());
  std::vector<Vec> w(T + 1);
  w[T] = terminal;
  for (int t = T - 1; t >= 0; --t) {
    Vec agg = Vec::Zero(terminal.size());
    for (const Vec& g : known.gradients[t]) agg += g;
    w[t] = w[t + 1] + (mu / static_cast<double>(known.gradients[t].size())) * agg;
  }
  return w;
}

}  // namespace fedleak::adversary
