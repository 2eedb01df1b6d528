#include <cstdio>
#include <iterator>

#include "fedleak/protocols.hpp"

namespace fedleak::protocols {

std::string_view to_string(LocalSolver::Kind kind) {
  switch (kind) {
    case LocalSolver::Kind::ExactQuadratic: return "exact";
    case LocalSolver::Kind::SingleStepGD: return "single_step_gd";
    case LocalSolver::Kind::QuadraticApprox: return "quadratic_approx";
  }
  return "?";
}

namespace {

DflState make_state(const topology::Graph& g, int block, Vec z0, double sigma_z2,
                    Transcript& transcript) {
  topology::EdgeSpace space(g, block);
  require(z0.size() == space.dim(), "dfl_init: z0 has wrong dimension");
  DflState s{0, space, std::vector<Vec>(g.num_nodes(), Vec::Zero(block)), std::move(z0)};
  s.sigma_z2 = sigma_z2;
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    for (NodeId j : g.neighbors(i))
      transcript.append({0, i, j, PayloadKind::InitZ, true, Vec(s.z_block(i, j))});
  return s;
}

// sum_j B_{i|j} z_{i|j}
Vec coupling(NodeId i, const DflState& s) {
  Vec acc = Vec::Zero(s.space.block());
  for (NodeId j : s.space.graph().neighbors(i)) {
    if (i < j)
      acc += s.z_block(i, j);
    else
      acc -= s.z_block(i, j);
  }
  return acc;
}

}  // namespace

DflState dfl_init(const topology::Graph& g, int block, double sigma_z2, std::mt19937_64& rng,
                  Transcript& transcript, InitNoise noise) {
  require(sigma_z2 >= 0.0, "dfl_init: sigma_z2 must be >= 0");
  topology::EdgeSpace space(g, block);
  Vec z0 = Vec::Zero(space.dim());
  if (sigma_z2 > 0.0) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(sigma_z2));
    for (Eigen::Index k = 0; k < z0.size(); ++k) z0[k] = gauss(rng);
    if (noise == InitNoise::PsiPerp) z0 = topology::SubspaceProjector(g, block).project_perp(z0);
  }
  return make_state(g, block, std::move(z0), sigma_z2, transcript);
}

DflState dfl_init_with(const topology::Graph& g, int block, const Vec& z0,
                       Transcript& transcript) {
  const double var = z0.size() > 0 ? z0.squaredNorm() / z0.size() : 0.0;
  return make_state(g, block, z0, var, transcript);
}

Vec dfl_w_update(NodeId i, const DflState& state, const objectives::Objective& objective) {
  const auto& g = state.space.graph();
  require(i >= 0 && i < g.num_nodes(), "dfl_w_update: node out of range");
  require(objective.dim() == state.space.block(), "dfl_w_update: objective dimension mismatch");
  const double rd = state.rho * g.degree(i);
  const Vec s = coupling(i, state);
  switch (state.solver.kind) {
    case LocalSolver::Kind::ExactQuadratic: {
      const Vec* a = objective.quadratic_target();
      require(a != nullptr, "dfl_w_update: exact solve needs a quadratic objective");
      return (*a - s) / (1.0 + rd);
    }
    case LocalSolver::Kind::SingleStepGD: {
      const Vec& w = state.w[i];
      return w - state.solver.mu * (objective.gradient(w) + s + rd * w);
    }
    case LocalSolver::Kind::QuadraticApprox: {
      Vec w = state.w[i];
      for (int k = 0; k < state.solver.inner_steps; ++k)
        w -= state.solver.mu * (objective.gradient(w) + s + rd * w);
      return w;
    }
  }
  throw Error("dfl_w_update: unknown solver");
}

std::vector<DeltaZ> dfl_z_update(NodeId i, const DflState& state, const Vec& w_i,
                                 Transcript& transcript) {
  const auto& g = state.space.graph();
  std::vector<DeltaZ> out;
  for (NodeId j : g.neighbors(i)) {
    const double sign = i < j ? 1.0 : -1.0;
    const auto z_ji = state.z_block(j, i);
    const Vec next = (1.0 - state.theta) * z_ji +
                     state.theta * (state.z_block(i, j) + 2.0 * state.rho * sign * w_i);
    Vec delta = next - z_ji;
    transcript.append({state.t + 1, i, j, PayloadKind::DeltaZ, false, delta});
    out.push_back({i, j, std::move(delta)});
  }
  return out;
}

void dfl_apply(DflState& state, std::span<const DeltaZ> deltas) {
  const int u = state.space.block();
  for (const auto& d : deltas) state.z.segment(state.space.offset(d.receiver, d.sender), u) += d.delta;
  ++state.t;
}

double consensus_residual(const topology::Graph& g, std::span<const Vec> w) {
  double worst = 0.0;
  for (const auto& e : g.edges()) worst = std::max(worst, (w[e.lo] - w[e.hi]).norm());
  return worst;
}

DflRun run_dfl_from(const topology::Graph& g,
                    std::span<const objectives::ObjectivePtr> objectives, const DflConfig& cfg,
                    const Vec& z0) {
  require(cfg.t_max >= 1, "run_dfl: t_max must be >= 1");
  require(cfg.rho > 0.0, "run_dfl: rho must be positive");
  require(cfg.theta > 0.0 && cfg.theta <= 1.0, "run_dfl: theta must lie in (0,1]");
  const int n = g.num_nodes();
  require(static_cast<int>(objectives.size()) == n, "run_dfl: one objective per node");
  const int block = objectives.front()->dim();

  Transcript transcript;
  DflState init = dfl_init_with(g, block, z0, transcript);
  DflRun run{std::move(init), std::move(transcript)};
  run.state.rho = cfg.rho;
  run.state.theta = cfg.theta;
  run.state.sigma_z2 = cfg.sigma_z2;
  run.state.solver = cfg.solver;
  if (cfg.w_init) {
    require(cfg.w_init->size() == block, "run_dfl: w_init has wrong dimension");
    for (auto& w : run.state.w) w = *cfg.w_init;
  }
  run.z0 = z0;
  if (cfg.record_z) run.z_history.push_back(run.state.z);

  for (int t = 0; t < cfg.t_max; ++t) {
    std::vector<Vec> next(n);
    for (NodeId i = 0; i < n; ++i) {
      next[i] = dfl_w_update(i, run.state, *objectives[i]);
      if (!next[i].allFinite() || next[i].norm() > cfg.divergence_limit) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "run_dfl: ||w_%d|| exceeded %.3g at t=%d", i,
                      cfg.divergence_limit, t);
        throw DivergenceError(msg);
      }
    }
    run.state.w = next;
    std::vector<DeltaZ> deltas;
    for (NodeId i = 0; i < n; ++i) {
      auto d = dfl_z_update(i, run.state, next[i], run.transcript);
      std::move(d.begin(), d.end(), std::back_inserter(deltas));
    }
    dfl_apply(run.state, deltas);

    double loss = 0.0;
    for (NodeId i = 0; i < n; ++i) loss += objectives[i]->value(next[i]);
    run.metrics.push_back({t, loss / n, consensus_residual(g, next)});
    run.weights.push_back(std::move(next));
    if (cfg.record_z) run.z_history.push_back(run.state.z);
  }
  return run;
}

DflRun run_dfl(const topology::Graph& g, std::span<const objectives::ObjectivePtr> objectives,
               const DflConfig& cfg, std::mt19937_64& rng) {
  require(!objectives.empty(), "run_dfl: no objectives");
  require(cfg.sigma_z2 >= 0.0, "run_dfl: sigma_z2 must be >= 0");
  Transcript scratch;
  const DflState init =
      dfl_init(g, objectives.front()->dim(), cfg.sigma_z2, rng, scratch, cfg.noise);
  DflRun run = run_dfl_from(g, objectives, cfg, init.z);
  run.state.sigma_z2 = cfg.sigma_z2;
  return run;
}

}  // namespace fedleak::protocols
