#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/common.hpp"
#include "fedleak/objectives.hpp"
#include "fedleak/topology.hpp"

namespace fedleak::protocols {

// Sender/receiver id used for the CFL aggregation server.
inline constexpr NodeId kServer = -1;

enum class PayloadKind { InitZ, DeltaZ, Gradient, GlobalModel, GossipGradient };

std::string_view to_string(PayloadKind kind);
PayloadKind payload_kind_from_string(std::string_view name);

// One transmitted message. For DFL, `t` is the superscript of the payload:
// InitZ carries z_{sender|receiver}^{(0)} at t = 0 and DeltaZ carries
// Delta z_{receiver|sender}^{(t)} for t >= 1. For CFL, Gradient records carry
// grad f_j(w_j^{(t)}) and GlobalModel records carry w_j^{(t)}.
struct Message {
  int t = 0;
  NodeId sender = 0;
  NodeId receiver = 0;
  PayloadKind kind = PayloadKind::DeltaZ;
  bool secure = false;
  Vec payload;
};

// Append-only record of everything sent during one run.
class Transcript {
 public:
  void append(Message msg);
  const std::vector<Message>& records() const { return records_; }
  size_t size() const { return records_.size(); }

  // One line per record: t,sender,receiver,kind,secure,<payload %.17g>.
  std::string to_text() const;
  static Transcript from_text(std::string_view text);

 private:
  std::vector<Message> records_;
};

// ---------------------------------------------------------------------------
// Centralized FedAvg.

struct CflState {
  int t = 0;
  std::vector<Vec> w;
  double mu = 0.1;
};

// Every node starts from `w0`; the server's initial broadcast is recorded.
CflState cfl_init(int n, const Vec& w0, double mu, Transcript& transcript);

// w_i <- w_i - (mu/n) sum_j grad f_j(w_j).
CflState cfl_step(const CflState& state,
                  std::span<const objectives::ObjectivePtr> objectives,
                  Transcript& transcript);

struct IterationMetrics {
  int t = 0;
  double mean_loss = 0.0;
  double consensus_residual = 0.0;
};

struct CflRun {
  CflState state;
  Transcript transcript;
  std::vector<IterationMetrics> metrics;
  // Ground truth (harness only): weights[t][i] for t = 0..t_max and
  // gradients[t][i] for t = 0..t_max-1.
  std::vector<std::vector<Vec>> weights;
  std::vector<std::vector<Vec>> gradients;
};

CflRun run_cfl(std::span<const objectives::ObjectivePtr> objectives, const Vec& w0,
               double mu, int t_max);

// ---------------------------------------------------------------------------
// Gossip baseline (D-PSGD style aggregation over neighbors).

struct GossipState {
  int t = 0;
  std::vector<Vec> w;
};

// w_i <- w_i - (mu/d_i) sum_{j in N_i} grad f_j(w_j).
GossipState gossip_step(const topology::Graph& g, const GossipState& state,
                        std::span<const objectives::ObjectivePtr> objectives, double mu,
                        Transcript& transcript);

// ---------------------------------------------------------------------------
// Differential A/PDMM.

struct LocalSolver {
  enum class Kind { ExactQuadratic, SingleStepGD, QuadraticApprox };
  Kind kind = Kind::ExactQuadratic;
  double mu = 0.0;
  int inner_steps = 1;

  static LocalSolver exact() { return {Kind::ExactQuadratic, 0.0, 1}; }
  static LocalSolver single_step_gd(double mu) { return {Kind::SingleStepGD, mu, 1}; }
  static LocalSolver quadratic_approx(double mu = 1.0 / 30.0, int inner_steps = 5) {
    return {Kind::QuadraticApprox, mu, inner_steps};
  }
};

std::string_view to_string(LocalSolver::Kind kind);

// How z^{(0)} is drawn. PsiPerp draws Gaussian noise and keeps only its
// Psi-perp component, which leaves every weight trajectory unchanged.
enum class InitNoise { Gaussian, PsiPerp };

struct DflState {
  int t = 0;
  topology::EdgeSpace space;
  // Latest local weights (w^{(t-1)} before iteration t runs; zero at start).
  std::vector<Vec> w;
  // Stacked z in EdgeSpace layout, as accumulated from z^{(0)} and Delta z.
  Vec z;
  double rho = 0.4;
  double theta = 1.0;
  double sigma_z2 = 0.0;
  LocalSolver solver;

  Eigen::Ref<const Vec> z_block(NodeId i, NodeId j) const {
    return z.segment(space.offset(i, j), space.block());
  }
};

// Draws z_{i|j}^{(0)} i.i.d. N(0, sigma_z2) per coordinate and records one
// secure InitZ message per directed edge.
DflState dfl_init(const topology::Graph& g, int block, double sigma_z2, std::mt19937_64& rng,
                  Transcript& transcript, InitNoise noise = InitNoise::Gaussian);
// Same, with an explicit stacked z^{(0)}.
DflState dfl_init_with(const topology::Graph& g, int block, const Vec& z0,
                       Transcript& transcript);

// argmin_w f_i(w) + sum_j z_{i|j}^T B_{i|j} w + (rho d_i / 2) ||w||^2, exactly or
// approximately depending on state.solver.
Vec dfl_w_update(NodeId i, const DflState& state, const objectives::Objective& objective);

struct DeltaZ {
  NodeId sender;
  NodeId receiver;
  Vec delta;  // Delta z_{receiver|sender}^{(t+1)}
};

// Computes Delta z_{j|i}^{(t+1)} for every neighbor j of i and records each as
// a plain message. Does not modify the state; dfl_apply adds the deltas.
std::vector<DeltaZ> dfl_z_update(NodeId i, const DflState& state, const Vec& w_i,
                                 Transcript& transcript);
void dfl_apply(DflState& state, std::span<const DeltaZ> deltas);

struct DflConfig {
  double rho = 0.4;
  double theta = 1.0;
  double sigma_z2 = 0.0;
  LocalSolver solver;
  int t_max = 100;
  InitNoise noise = InitNoise::Gaussian;
  bool record_z = false;
  double divergence_limit = 1e12;
  // Starting point of the iterative local solvers (zero when absent).
  std::optional<Vec> w_init;
};

struct DflRun {
  DflState state;
  Transcript transcript;
  std::vector<IterationMetrics> metrics;
  // Ground truth (harness only). weights[t][i] = w_i^{(t)}, t = 0..t_max-1.
  std::vector<std::vector<Vec>> weights;
  // z^{(t)} stacked, t = 0..t_max, when record_z is set.
  std::vector<Vec> z_history;
  Vec z0;
};

DflRun run_dfl(const topology::Graph& g, std::span<const objectives::ObjectivePtr> objectives,
               const DflConfig& cfg, std::mt19937_64& rng);
// Variant with an explicit z^{(0)}.
DflRun run_dfl_from(const topology::Graph& g,
                    std::span<const objectives::ObjectivePtr> objectives, const DflConfig& cfg,
                    const Vec& z0);

// Max over edges of ||w_i - w_j||.
double consensus_residual(const topology::Graph& g, std::span<const Vec> w);

}  // namespace fedleak::protocols
