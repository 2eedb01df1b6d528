#include "fedleak/protocols.hpp"

namespace fedleak::protocols {

CflState cfl_init(int n, const Vec& w0, double mu, Transcript& transcript) {
  require(n >= 1, "cfl_init: need at least one node");
  require(mu > 0.0, "cfl_init: mu must be positive");
  CflState s{0, std::vector<Vec>(n, w0), mu};
  for (NodeId j = 0; j < n; ++j)
    transcript.append({0, kServer, j, PayloadKind::GlobalModel, false, w0});
  return s;
}

CflState cfl_step(const CflState& state,
                  std::span<const objectives::ObjectivePtr> objectives,
                  Transcript& transcript) {
  const int n = static_cast<int>(state.w.size());
  require(static_cast<int>(objectives.size()) == n, "cfl_step: one objective per node");
  Vec aggregate = Vec::Zero(state.w.front().size());
  for (NodeId j = 0; j < n; ++j) {
    require(state.w[j].size() == aggregate.size(), "cfl_step: nodes disagree on dimension");
    Vec g = objectives[j]->gradient(state.w[j]);
    aggregate += g;
    transcript.append({state.t, j, kServer, PayloadKind::Gradient, false, std::move(g)});
  }
  aggregate /= n;
  CflState next{state.t + 1, state.w, state.mu};
  for (NodeId j = 0; j < n; ++j) {
    next.w[j] -= state.mu * aggregate;
    transcript.append({next.t, kServer, j, PayloadKind::GlobalModel, false, next.w[j]});
  }
  return next;
}

CflRun run_cfl(std::span<const objectives::ObjectivePtr> objectives, const Vec& w0,
               double mu, int t_max) {
  require(t_max >= 1, "run_cfl: t_max must be >= 1");
  const int n = static_cast<int>(objectives.size());
  CflRun run;
  run.state = cfl_init(n, w0, mu, run.transcript);
  run.weights.push_back(run.state.w);
  for (int t = 0; t < t_max; ++t) {
    std::vector<Vec> grads;
    double loss = 0.0;
    for (NodeId j = 0; j < n; ++j) {
      grads.push_back(objectives[j]->gradient(run.state.w[j]));
      loss += objectives[j]->value(run.state.w[j]);
    }
    run.gradients.push_back(std::move(grads));
    run.metrics.push_back({t, loss / n, 0.0});
    run.state = cfl_step(run.state, objectives, run.transcript);
    for (const auto& w : run.state.w)
      if (!w.allFinite() || w.norm() > 1e12)
        throw DivergenceError("run_cfl: weights diverged at t=" + std::to_string(t));
    run.weights.push_back(run.state.w);
  }
  return run;
}

GossipState gossip_step(const topology::Graph& g, const GossipState& state,
                        std::span<const objectives::ObjectivePtr> objectives, double mu,
                        Transcript& transcript) {
  const int n = g.num_nodes();
  require(static_cast<int>(state.w.size()) == n && static_cast<int>(objectives.size()) == n,
          "gossip_step: one weight and objective per node");
  std::vector<Vec> grads;
  grads.reserve(n);
  for (NodeId j = 0; j < n; ++j) grads.push_back(objectives[j]->gradient(state.w[j]));
  GossipState next{state.t + 1, state.w};
  for (NodeId i = 0; i < n; ++i) {
    const int d = g.degree(i);
    if (d == 0) continue;
    Vec sum = Vec::Zero(state.w[i].size());
    for (NodeId j : g.neighbors(i)) {
      transcript.append({state.t, j, i, PayloadKind::GossipGradient, false, grads[j]});
      sum += grads[j];
    }
    next.w[i] -= (mu / d) * sum;
  }
  return next;
}

}  // namespace fedleak::protocols
