#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fedleak/common.hpp"
#include "fedleak/objectives.hpp"
#include "fedleak/protocols.hpp"
#include "fedleak/topology.hpp"

namespace fedleak::adversary {

// Public protocol parameters the adversary is assumed to know.
struct ProtocolParams {
  double rho = 0.4;
  double theta = 1.0;
  protocols::LocalSolver solver;
};

// Internal state of the colluding nodes in the passive model.
struct CorruptKnowledge {
  // Local objectives (datasets) of the corrupt nodes, keyed by node id.
  std::vector<std::pair<NodeId, objectives::ObjectivePtr>> objectives;
  // w_c^{(T-1)} of any corrupt node; used as the converged anchor.
  std::optional<Vec> terminal_weight;
  // Corrupt node that holds terminal_weight (-1 when unspecified).
  NodeId terminal_owner = -1;
};

enum class Mode { Eavesdropper, Passive };

// Knowledge assembled from a DFL transcript. The eavesdropper keeps only plain
// records; the passive adversary additionally keeps z^{(0)} of every edge with
// a corrupt endpoint plus the corrupt nodes' internal state. An eavesdropper
// behaves like a passive adversary with an empty corrupt set and no internal
// state.
class AdversaryView {
 public:
  static AdversaryView eavesdropper(const protocols::Transcript& transcript,
                                    const topology::Graph& g);
  static AdversaryView passive(const protocols::Transcript& transcript,
                               const topology::Graph& g, std::span<const NodeId> corrupt,
                               CorruptKnowledge internal = {});

  Mode mode() const { return mode_; }
  const topology::Graph& graph() const { return space_.graph(); }
  const topology::EdgeSpace& space() const { return space_; }
  const topology::HonestPartition& partition() const { return partition_; }
  const CorruptKnowledge& internal() const { return internal_; }
  int block() const { return space_.block(); }
  // Number of Delta z rounds observed (T); Delta z^{(t)} exists for t = 1..T.
  int horizon() const { return static_cast<int>(delta_.size()); }

  // Delta z_{j|i}^{(t)}, i.e. the message sent by i to j carrying round t.
  Eigen::Ref<const Vec> delta_z(NodeId j, NodeId i, int t) const;
  // sum_{tau=1}^{t} Delta z_{j|i}^{(tau)} (zero for t = 0).
  Vec accumulated_delta(NodeId j, NodeId i, int t) const;
  // z_{i|j}^{(0)} if the adversary holds it.
  std::optional<Vec> known_z0(NodeId i, NodeId j) const;
  // Records visible to this adversary, in transcript order.
  const std::vector<protocols::Message>& visible_records() const { return visible_; }

 private:
  AdversaryView(Mode mode, const protocols::Transcript& transcript, const topology::Graph& g,
                std::span<const NodeId> corrupt, CorruptKnowledge internal);

  Mode mode_;
  topology::EdgeSpace space_;
  topology::HonestPartition partition_;
  CorruptKnowledge internal_;
  std::vector<protocols::Message> visible_;
  // delta_[t-1] is the stacked Delta z^{(t)}; cumulative_[t-1] its prefix sum.
  std::vector<Vec> delta_;
  std::vector<Vec> cumulative_;
  std::vector<std::optional<Vec>> z0_;  // per slot
};

// Largest ||w_i^{(T-1)} - w_j^{(T-1)}|| over edges, computed from the last
// round of Delta z messages (their pairwise sum is 2 rho theta B (w_i - w_j)).
double observed_consensus_residual(const AdversaryView& view, const ProtocolParams& params);

// w_i^{(t)} - w_i^{(t-1)} for t = 1..T-1, recovered through the first incident
// edge of i (or through `via` when given).
Vec weight_increment(const AdversaryView& view, const ProtocolParams& params, NodeId i, int t,
                     std::optional<NodeId> via = std::nullopt);

struct RecoveryOptions {
  // Maximum observed consensus residual for the anchor to be accepted.
  double consensus_tol = 1e-8;
  // Anchor supplied from outside the view (required for eavesdroppers).
  std::optional<Vec> anchor;
  // Per-node anchors: the anchor is the terminal weight of `anchor_node`
  // (default: the terminal_owner of the corrupt knowledge), and every other
  // node's terminal weight follows from the last-round pairwise gaps
  // w_lo - w_hi. No convergence is required in this mode.
  bool per_node_anchors = false;
  std::optional<NodeId> anchor_node;
};

// weights[t][i] = w_i^{(t)}, t = 0..T-1: anchored at the shared terminal weight
// and unwound through the per-round increments.
using WeightTable = std::vector<std::vector<Vec>>;
WeightTable recover_weights(const AdversaryView& view, const ProtocolParams& params,
                            const RecoveryOptions& opts = {});

// z_{lo|hi}^{(0)} - z_{hi|lo}^{(0)} for every edge (lo < hi), in edge order.
std::vector<Vec> z0_differences(const AdversaryView& view, const ProtocolParams& params,
                                const WeightTable& weights);

// Derives the three observables for honest nodes from one view. The view
// must outlive the extractor.
class ObservableExtractor {
 public:
  ObservableExtractor(const AdversaryView& view, ProtocolParams params,
                      const RecoveryOptions& opts = {});
  // Without absolute weights: only gradient differences are available.
  static ObservableExtractor differences_only(const AdversaryView& view, ProtocolParams params);

  const WeightTable& weights() const;
  bool has_weights() const { return !weights_.empty(); }
  const std::vector<Vec>& z0_diffs() const;

  // Valid t for each observable.
  int noisy_gradient_end() const;       // t in [0, end)
  int gradient_difference_end() const;  // t in [first, end)
  int gradient_difference_first() const;

  // grad f_i(w_i^{(t)}) + sum_{k in N_{i,h}} B_{i|k} z_{i|k}^{(0)}.
  Vec noisy_gradient(NodeId i, int t) const;
  // grad f_i(w_i^{(t+1)}) - grad f_i(w_i^{(t)}); independent of z^{(0)}.
  Vec gradient_difference(NodeId i, int t) const;
  // sum over the l-th honest component of grad f_j(w_j^{(t)}).
  Vec component_gradient_sum(int l, int t) const;

 private:
  struct NoWeights {};
  ObservableExtractor(const AdversaryView& view, ProtocolParams params, NoWeights);
  void check_extractable() const;
  Vec coupling_sum(NodeId i, int t) const;

  const AdversaryView* view_;
  ProtocolParams params_;
  WeightTable weights_;
  std::vector<Vec> z0_diffs_;
};

// All observables for every honest node and iteration. Memory grows with
// n * T * u; intended for small models.
struct Observables {
  WeightTable recovered_w;
  std::vector<std::vector<Vec>> noisy_gradients;   // [i][t], empty for corrupt i
  std::vector<std::vector<Vec>> gradient_diffs;    // [i][t - first]
  std::vector<std::vector<Vec>> component_sums;    // [l][t]
  std::vector<Vec> z0_diffs;
  int diff_first = 0;
};

Observables assemble_observables(const AdversaryView& view, const ProtocolParams& params,
                                 const RecoveryOptions& opts = {});

// What an eavesdropper sees in FedAvg: every node's gradient and weights.
struct CflKnowledge {
  std::vector<std::vector<Vec>> gradients;  // [t][j], t = 0..T-1
  std::vector<std::vector<Vec>> weights;    // [t][j], t = 0..T
};

CflKnowledge cfl_view(const protocols::Transcript& transcript);

// Rebuilds w^{(t)} for every t from the terminal model and the recorded
// gradients: w^{(t)} = w^{(t+1)} + (mu/n) sum_j grad f_j(w_j^{(t)}).
std::vector<Vec> cfl_unwind(const Vec& terminal, const CflKnowledge& known, double mu);

}  // namespace fedleak::adversary
