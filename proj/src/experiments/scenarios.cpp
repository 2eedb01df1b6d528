#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <memory>
#include <numeric>

#include "fedleak/adversary.hpp"
#include "fedleak/experiments.hpp"
#include "fedleak/infotheory.hpp"

namespace fedleak::experiments {

using objectives::Dataset;
using objectives::MlpModel;
using objectives::MlpShape;
using objectives::ObjectivePtr;

std::uint64_t trial_seed(std::uint64_t seed, int k) {
  std::uint64_t z = seed + static_cast<std::uint64_t>(k) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr int kNonMembers = 16;

// Independent streams derived from one trial seed.
enum Stream : std::uint64_t { kData = 1, kNoise = 2, kAttack = 3, kChoice = 4 };

std::mt19937_64 stream(std::uint64_t seed, Stream s, int salt = 0) {
  return std::mt19937_64(trial_seed(seed ^ (static_cast<std::uint64_t>(s) << 56), salt));
}

std::string tagged(const char* metric, const char* key, double value) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s/%s=%g", metric, key, value);
  return buf;
}

[[noreturn]] void infeasible(const char* field, const std::string& message) {
  throw ConfigError({{0, field, message}});
}

int as_count(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e6)
    infeasible("sweep", std::string(what) + " values must be non-negative integers");
  return static_cast<int>(v);
}

topology::Graph make_graph(const GraphParams& p, std::mt19937_64& rng) {
  if (p.kind == "ring") return topology::Graph::ring(p.nodes);
  if (p.kind == "path") return topology::Graph::path(p.nodes);
  if (p.kind == "complete") return topology::Graph::complete(p.nodes);
  if (p.kind == "star") return topology::Graph::star(p.nodes);
  if (p.kind == "edges") return topology::Graph::from_edge_list(p.edges);
  const double r = p.radius.value_or(topology::default_rgg_radius(p.nodes));
  return topology::random_geometric_graph(p.nodes, r, rng, 100, p.dims);
}

protocols::LocalSolver make_solver(const ProtocolParams& p) {
  if (p.solver == "exact") return protocols::LocalSolver::exact();
  if (p.solver == "quadratic_approx") return protocols::LocalSolver::quadratic_approx(p.mu);
  return protocols::LocalSolver::single_step_gd(p.mu);
}

protocols::DflConfig dfl_config(const ExperimentConfig& c, double sigma_z2) {
  protocols::DflConfig d;
  d.rho = c.protocol.rho;
  d.theta = c.protocol.theta;
  d.sigma_z2 = sigma_z2;
  d.solver = make_solver(c.protocol);
  d.t_max = c.protocol.t_max;
  return d;
}

adversary::InversionConfig inversion_config(const ExperimentConfig& c) {
  adversary::InversionConfig ic;
  ic.steps = c.adversary.steps;
  ic.restarts = c.adversary.restarts;
  return ic;
}

std::vector<int> corrupt_set(const ExperimentConfig& c, int n) {
  std::vector<int> out = c.adversary.corrupt;
  if (c.adversary.corrupt_fraction) {
    const int k = static_cast<int>(std::lround(*c.adversary.corrupt_fraction * n));
    out.resize(k);
    std::iota(out.begin(), out.end(), 0);
  }
  for (int id : out)
    if (id >= n) infeasible("adversary.corrupt", "node id " + std::to_string(id) + " is out of range");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Honest node farthest (in hops) from every corrupt node; node 0 without any.
NodeId pick_target(const topology::Graph& g, std::span<const int> corrupt) {
  const int n = g.num_nodes();
  if (corrupt.empty()) return 0;
  if (static_cast<int>(corrupt.size()) >= n) infeasible("adversary.corrupt", "no honest node left");
  std::vector<int> dist(n, -1);
  std::deque<NodeId> queue;
  for (int c : corrupt) {
    dist[c] = 0;
    queue.push_back(c);
  }
  while (!queue.empty()) {
    const NodeId i = queue.front();
    queue.pop_front();
    for (NodeId j : g.neighbors(i))
      if (dist[j] < 0) {
        dist[j] = dist[i] + 1;
        queue.push_back(j);
      }
  }
  NodeId best = -1;
  for (NodeId i = 0; i < n; ++i)
    if (dist[i] != 0 && (best < 0 || dist[i] > dist[best])) best = i;
  return best;
}

struct ImageTask {
  MlpShape shape;
  std::vector<Dataset> data;
  std::vector<ObjectivePtr> objs;
  MlpModel init;
};

ImageTask image_task(const ExperimentConfig& c, int nodes, int per_node, std::mt19937_64& rng) {
  const auto& d = c.data;
  if (d.kind != "images") infeasible("data.kind", "this scenario needs image data");
  ImageTask task;
  task.shape = {d.side * d.side, d.hidden, d.classes};
  task.data = objectives::synthetic_image_dataset(nodes, per_node, d.side, d.classes, rng, d.noise);
  for (const auto& ds : task.data)
    task.objs.push_back(std::make_shared<objectives::MlpObjective>(task.shape, ds, d.weight_decay));
  task.init = MlpModel::random(task.shape, rng);
  return task;
}

std::vector<Vec> inputs_of(const Dataset& d) {
  std::vector<Vec> out;
  for (const auto& s : d.samples()) out.push_back(s.x);
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// The adversary's view plus the extractor built on it (the extractor keeps a
// pointer to the view, so both live on the heap together).
struct Attacker {
  std::unique_ptr<adversary::AdversaryView> view;
  std::unique_ptr<adversary::ObservableExtractor> ex;
};

// Without corrupt nodes the eavesdropper is handed node 0's final model as
// its anchor; otherwise the first corrupt node's own final model is used.
Attacker attacker(const protocols::DflRun& run, const topology::Graph& g,
                  std::span<const int> corrupt, const std::vector<ObjectivePtr>& objs,
                  const protocols::DflConfig& cfg) {
  Attacker a;
  const int last = cfg.t_max - 1;
  adversary::RecoveryOptions ro;
  ro.per_node_anchors = true;
  if (corrupt.empty()) {
    a.view = std::make_unique<adversary::AdversaryView>(
        adversary::AdversaryView::eavesdropper(run.transcript, g));
    ro.anchor = run.weights[last][0];
    ro.anchor_node = 0;
  } else {
    adversary::CorruptKnowledge ck;
    for (int id : corrupt) ck.objectives.emplace_back(id, objs[id]);
    ck.terminal_weight = run.weights[last][corrupt[0]];
    ck.terminal_owner = corrupt[0];
    a.view = std::make_unique<adversary::AdversaryView>(
        adversary::AdversaryView::passive(run.transcript, g, corrupt, ck));
  }
  a.ex = std::make_unique<adversary::ObservableExtractor>(
      *a.view, adversary::ProtocolParams{cfg.rho, cfg.theta, cfg.solver}, ro);
  return a;
}

void need_difference_at(const adversary::ObservableExtractor& ex, int t, const char* field) {
  if (t < ex.gradient_difference_first() || t >= ex.gradient_difference_end())
    infeasible(field, "iteration " + std::to_string(t) +
                          " has no gradient difference; raise protocol.t_max");
}

class Emitter {
 public:
  Emitter(std::vector<ResultRow>& rows, std::string scenario)
      : rows_(rows), scenario_(std::move(scenario)) {}
  void operator()(std::uint64_t seed, int iteration, std::string metric, double value) {
    rows_.push_back({scenario_, seed, iteration, std::move(metric), value});
  }

 private:
  std::vector<ResultRow>& rows_;
  std::string scenario_;
};

// ---------------------------------------------------------------------------

void logistic_trajectory(const ExperimentConfig& c, std::uint64_t seed, Emitter& emit) {
  if (c.data.kind != "gaussian") infeasible("data.kind", "logistic_fig2 uses gaussian data");
  if (c.data.per_node != 1) infeasible("data.per_node", "logistic_fig2 needs one sample per node");
  auto rng = stream(seed, kData);
  const topology::Graph g = make_graph(c.graph, rng);
  const auto data = objectives::synthetic_gaussian_dataset(g.num_nodes(), 1, rng);
  std::vector<ObjectivePtr> objs;
  for (const auto& d : data) objs.push_back(std::make_shared<objectives::LogisticObjective>(d));

  const auto cfg = dfl_config(c, c.protocol.sigma_z2);
  auto noise = stream(seed, kNoise);
  const auto run = protocols::run_dfl(g, objs, cfg, noise);
  const auto cfl = protocols::run_cfl(objs, Vec::Zero(objs[0]->dim()), c.protocol.cfl_mu, cfg.t_max);
  const auto view = adversary::AdversaryView::eavesdropper(run.transcript, g);
  const auto ex = adversary::ObservableExtractor::differences_only(
      view, {cfg.rho, cfg.theta, cfg.solver});

  const int v = data[0].input_dim();
  for (int t = 0; t < cfg.t_max; ++t) {
    emit(seed, t, "loss_dfl", run.metrics[t].mean_loss);
    emit(seed, t, "loss_cfl", cfl.metrics[t].mean_loss);
  }
  for (int t = ex.gradient_difference_first(); t < ex.gradient_difference_end(); ++t) {
    std::vector<double> ed, ec;
    for (int i = 0; i < g.num_nodes(); ++i) {
      const Vec& x = data[i][0].x;
      const Vec d = ex.gradient_difference(i, t);
      const Vec& gc = cfl.gradients[t][i];
      // A vanishing bias entry leaves nothing to divide by; such nodes are skipped.
      try {
        ed.push_back((adversary::reconstruct_logistic_input(d.head(v), d[v]) - x).norm() / x.norm());
      } catch (const Error&) {
      }
      try {
        ec.push_back((adversary::reconstruct_logistic_input(gc.head(v), gc[v]) - x).norm() /
                     x.norm());
      } catch (const Error&) {
      }
    }
    if (!ed.empty()) emit(seed, t, "recon_error_dfl", mean_of(ed));
    if (!ec.empty()) emit(seed, t, "recon_error_cfl", mean_of(ec));
  }
}

void zvar_sweep(const ExperimentConfig& c, std::uint64_t seed, Emitter& emit) {
  auto rng = stream(seed, kData);
  const topology::Graph g = make_graph(c.graph, rng);
  const ImageTask task = image_task(c, g.num_nodes(), c.data.per_node, rng);
  const auto corrupt = corrupt_set(c, g.num_nodes());
  if (corrupt.empty()) infeasible("adversary.corrupt", "zvar_sweep needs at least one corrupt node");
  const NodeId target = pick_target(g, corrupt);
  const int t = c.adversary.attack_iter;
  const auto ic = inversion_config(c);
  const auto truth = inputs_of(task.data[target]);
  const double l2 = c.data.weight_decay;
  const int batch = c.data.per_node;

  bool difference_done = false;
  for (double s2 : c.sweep) {
    if (!(s2 >= 0.0)) infeasible("sweep", "sigma_z2 values must be >= 0");
    auto cfg = dfl_config(c, s2);
    cfg.w_init = task.init.params;
    // Same noise stream for every variance: z0 only changes scale.
    auto noise = stream(seed, kNoise);
    const auto run = protocols::run_dfl(g, task.objs, cfg, noise);
    const Attacker a = attacker(run, g, corrupt, task.objs, cfg);
    need_difference_at(*a.ex, t, "adversary.attack_iter");

    const MlpModel before{task.shape, a.ex->weights()[t][target]};
    objectives::GradientVector gv(task.shape, a.ex->noisy_gradient(target, t) - l2 * before.params);
    auto arng = stream(seed, kAttack);
    auto r = adversary::gradient_inversion(gv, before, batch, std::nullopt, ic, arng);
    adversary::score_attack(r, truth, c.data.side, c.data.side);
    emit(seed, t, tagged("ssim_noisy", "sigma_z2", s2), mean_of(r.ssim));

    if (!difference_done) {
      const MlpModel after{task.shape, a.ex->weights()[t + 1][target]};
      const Vec diff = a.ex->gradient_difference(target, t) - l2 * (after.params - before.params);
      auto drng = stream(seed, kAttack, 1);
      auto rd = adversary::gradient_difference_inversion(diff, before, after, batch, std::nullopt,
                                                         ic, drng);
      adversary::score_attack(rd, truth, c.data.side, c.data.side);
      emit(seed, t, "ssim_difference", mean_of(rd.ssim));
      difference_done = true;
    }
  }
}

void attack_vs_iter(const ExperimentConfig& c, std::uint64_t seed, Emitter& emit) {
  auto rng = stream(seed, kData);
  const topology::Graph g = make_graph(c.graph, rng);
  const ImageTask task = image_task(c, g.num_nodes(), c.data.per_node, rng);
  const auto corrupt = corrupt_set(c, g.num_nodes());
  const NodeId target = pick_target(g, corrupt);
  auto cfg = dfl_config(c, c.protocol.sigma_z2);
  cfg.w_init = task.init.params;
  auto noise = stream(seed, kNoise);
  const auto run = protocols::run_dfl(g, task.objs, cfg, noise);
  const auto cfl = protocols::run_cfl(task.objs, task.init.params, c.protocol.cfl_mu, cfg.t_max);
  const Attacker a = attacker(run, g, corrupt, task.objs, cfg);
  const auto ic = inversion_config(c);
  const auto truth = inputs_of(task.data[target]);
  const double l2 = c.data.weight_decay;
  const int batch = c.data.per_node;

  for (size_t k = 0; k < c.sweep.size(); ++k) {
    const int t = as_count(c.sweep[k], "iteration");
    need_difference_at(*a.ex, t, "sweep");
    const MlpModel mc{task.shape, cfl.weights[t][target]};
    objectives::GradientVector gc(task.shape, cfl.gradients[t][target] - l2 * mc.params);
    auto crng = stream(seed, kAttack, 2 * static_cast<int>(k));
    auto rc = adversary::gradient_inversion(gc, mc, batch, std::nullopt, ic, crng);
    adversary::score_attack(rc, truth, c.data.side, c.data.side);
    emit(seed, t, "ssim_cfl", mean_of(rc.ssim));

    const MlpModel before{task.shape, a.ex->weights()[t][target]};
    const MlpModel after{task.shape, a.ex->weights()[t + 1][target]};
    const Vec diff = a.ex->gradient_difference(target, t) - l2 * (after.params - before.params);
    auto drng = stream(seed, kAttack, 2 * static_cast<int>(k) + 1);
    auto rd = adversary::gradient_difference_inversion(diff, before, after, batch, std::nullopt, ic,
                                                       drng);
    adversary::score_attack(rd, truth, c.data.side, c.data.side);
    emit(seed, t, "ssim_dfl", mean_of(rd.ssim));
  }
}

void batch_sweep(const ExperimentConfig& c, std::uint64_t seed, Emitter& emit) {
  const int t = c.adversary.attack_iter;
  const auto ic = inversion_config(c);
  const double l2 = c.data.weight_decay;
  for (double value : c.sweep) {
    const int batch = as_count(value, "batch size");
    if (batch < 1) infeasible("sweep", "batch sizes must be >= 1");
    auto rng = stream(seed, kData, batch);
    const topology::Graph g = make_graph(c.graph, rng);
    const ImageTask task = image_task(c, g.num_nodes(), batch, rng);
    const auto corrupt = corrupt_set(c, g.num_nodes());
    const NodeId target = pick_target(g, corrupt);
    auto cfg = dfl_config(c, c.protocol.sigma_z2);
    cfg.w_init = task.init.params;
    auto noise = stream(seed, kNoise, batch);
    const auto run = protocols::run_dfl(g, task.objs, cfg, noise);
    const auto cfl = protocols::run_cfl(task.objs, task.init.params, c.protocol.cfl_mu, t + 1);
    const Attacker a = attacker(run, g, corrupt, task.objs, cfg);
    need_difference_at(*a.ex, t, "adversary.attack_iter");
    const auto truth = inputs_of(task.data[target]);

    const MlpModel mc{task.shape, cfl.weights[t][target]};
    objectives::GradientVector gc(task.shape, cfl.gradients[t][target] - l2 * mc.params);
    auto crng = stream(seed, kAttack, 2 * batch);
    auto rc = adversary::gradient_inversion(gc, mc, batch, std::nullopt, ic, crng);
    adversary::score_attack(rc, truth, c.data.side, c.data.side);
    emit(seed, t, tagged("ssim_cfl", "n_i", batch), mean_of(rc.ssim));

    const MlpModel before{task.shape, a.ex->weights()[t][target]};
    const MlpModel after{task.shape, a.ex->weights()[t + 1][target]};
    const Vec diff = a.ex->gradient_difference(target, t) - l2 * (after.params - before.params);
    auto drng = stream(seed, kAttack, 2 * batch + 1);
    auto rd = adversary::gradient_difference_inversion(diff, before, after, batch, std::nullopt, ic,
                                                       drng);
    adversary::score_attack(rd, truth, c.data.side, c.data.side);
    emit(seed, t, tagged("ssim_dfl", "n_i", batch), mean_of(rd.ssim));
  }
}

// Inverts the summed gradient of the honest component containing `member`.
double component_attack(const ExperimentConfig& c, const ImageTask& task, const Attacker& a,
                        NodeId member, int t, std::uint64_t seed, int salt) {
  const auto& part = a.view->partition();
  const int l = part.component_of(member);
  const auto& comp = part.honest_components[l];
  Vec target = a.ex->component_gradient_sum(l, t);
  std::vector<MlpModel> models;
  std::vector<int> batches;
  std::vector<Vec> truth;
  for (NodeId j : comp) {
    models.push_back({task.shape, a.ex->weights()[t][j]});
    target -= c.data.weight_decay * models.back().params;
    batches.push_back(task.data[j].size());
    for (auto& x : inputs_of(task.data[j])) truth.push_back(std::move(x));
  }
  auto arng = stream(seed, kAttack, salt);
  auto r = adversary::gradient_sum_inversion(target, models, batches, std::nullopt,
                                             inversion_config(c), arng);
  adversary::score_attack(r, truth, c.data.side, c.data.side);
  return mean_of(r.ssim);
}

void component_sweep(const ExperimentConfig& c, std::uint64_t seed, Emitter& emit) {
  const int t = c.adversary.attack_iter;
  for (double value : c.sweep) {
    const int k = as_count(value, "component size");
    if (k < 1) infeasible("sweep", "component sizes must be >= 1");
    // One corrupt node closing a ring of k honest nodes.
    const topology::Graph g = k == 1 ? topology::Graph::path(2) : topology::Graph::ring(k + 1);
    auto rng = stream(seed, kData, k);
    const ImageTask task = image_task(c, k + 1, c.data.per_node, rng);
    auto cfg = dfl_config(c, c.protocol.sigma_z2);
    cfg.w_init = task.init.params;
    auto noise = stream(seed, kNoise, k);
    const auto run = protocols::run_dfl(g, task.objs, cfg, noise);
    const std::vector<int> corrupt{0};
    const Attacker a = attacker(run, g, corrupt, task.objs, cfg);
    if (t >= a.ex->noisy_gradient_end())
      infeasible("adversary.attack_iter", "attacked iteration is past the run");
    emit(seed, t, tagged("ssim_sum", "size", k), component_attack(c, task, a, 1, t, seed, k));
  }
}

void corrupt_fraction(const ExperimentConfig& c, std::uint64_t seed, Emitter& emit) {
  auto rng = stream(seed, kData);
  const topology::Graph g = make_graph(c.graph, rng);
  const int n = g.num_nodes();
  const ImageTask task = image_task(c, n, c.data.per_node, rng);
  auto cfg = dfl_config(c, c.protocol.sigma_z2);
  cfg.w_init = task.init.params;
  auto noise = stream(seed, kNoise);
  const auto run = protocols::run_dfl(g, task.objs, cfg, noise);
  const int t = c.adversary.attack_iter;
  const auto cfl = protocols::run_cfl(task.objs, task.init.params, c.protocol.cfl_mu, t + 1);
  auto choice = stream(seed, kChoice);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), choice);

  std::vector<double> counts = c.sweep;
  if (c.adversary.corrupt_fraction) counts = {std::round(*c.adversary.corrupt_fraction * n)};
  for (double value : counts) {
    const int k = as_count(value, "corrupt count");
    if (k < 1 || k >= n) infeasible("sweep", "corrupt counts must lie in [1, nodes - 1]");
    std::vector<int> corrupt(order.begin(), order.begin() + k);
    std::sort(corrupt.begin(), corrupt.end());
    const NodeId target = order[k];
    const Attacker a = attacker(run, g, corrupt, task.objs, cfg);
    if (t >= a.ex->noisy_gradient_end())
      infeasible("adversary.attack_iter", "attacked iteration is past the run");
    emit(seed, t, tagged("ssim_dfl", "corrupt", k), component_attack(c, task, a, target, t, seed, k));

    const MlpModel mc{task.shape, cfl.weights[t][target]};
    objectives::GradientVector gc(task.shape,
                                  cfl.gradients[t][target] - c.data.weight_decay * mc.params);
    auto crng = stream(seed, kAttack, 100 + k);
    auto rc = adversary::gradient_inversion(gc, mc, c.data.per_node, std::nullopt,
                                            inversion_config(c), crng);
    adversary::score_attack(rc, inputs_of(task.data[target]), c.data.side, c.data.side);
    emit(seed, t, tagged("ssim_cfl", "corrupt", k), mean_of(rc.ssim));
  }
}

void mia_auc(const ExperimentConfig& c, std::uint64_t seed, Emitter& emit) {
  auto rng = stream(seed, kData);
  const topology::Graph g = make_graph(c.graph, rng);
  const int n = g.num_nodes();
  const ImageTask task = image_task(c, n, c.data.per_node, rng);
  const Dataset outsiders = objectives::synthetic_image_dataset(
      1, kNonMembers, c.data.side, c.data.classes, rng, c.data.noise)[0];
  auto cfg = dfl_config(c, c.protocol.sigma_z2);
  cfg.w_init = task.init.params;
  auto noise = stream(seed, kNoise);
  const auto run = protocols::run_dfl(g, task.objs, cfg, noise);
  const int t = c.adversary.attack_iter;
  const auto cfl = protocols::run_cfl(task.objs, task.init.params, c.protocol.cfl_mu, t + 1);
  auto choice = stream(seed, kChoice);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), choice);

  std::vector<double> counts = c.sweep;
  if (c.adversary.corrupt_fraction) counts = {std::round(*c.adversary.corrupt_fraction * n)};
  const auto cosine = adversary::MembershipVariant::Cosine;
  for (double value : counts) {
    const int k = as_count(value, "corrupt count");
    if (k < 1 || k >= n) infeasible("sweep", "corrupt counts must lie in [1, nodes - 1]");
    std::vector<int> corrupt(order.begin(), order.begin() + k);
    std::sort(corrupt.begin(), corrupt.end());
    const Attacker a = attacker(run, g, corrupt, task.objs, cfg);
    if (t >= a.ex->noisy_gradient_end())
      infeasible("adversary.attack_iter", "attacked iteration is past the run");
    const auto& part = a.view->partition();
    std::vector<double> auc_c, auc_d;
    for (NodeId i : part.honest) {
      const Vec& obs_c = cfl.gradients[t][i];
      const Vec obs_d = a.ex->component_gradient_sum(part.component_of(i), t);
      const MlpModel mc{task.shape, cfl.weights[t][i]};
      const MlpModel md{task.shape, a.ex->weights()[t][i]};
      std::vector<double> sc, sd;
      std::vector<bool> member;
      auto score = [&](const objectives::Sample& s, bool in) {
        const Dataset one({s}, c.data.classes);
        sc.push_back(adversary::membership_score(obs_c, objectives::mlp_grad(mc, one).flat(), cosine).score);
        sd.push_back(adversary::membership_score(obs_d, objectives::mlp_grad(md, one).flat(), cosine).score);
        member.push_back(in);
      };
      for (const auto& s : task.data[i].samples()) score(s, true);
      for (const auto& s : outsiders.samples()) score(s, false);
      auc_c.push_back(adversary::roc_auc(sc, member));
      auc_d.push_back(adversary::roc_auc(sd, member));
    }
    emit(seed, t, tagged("auc_cfl", "corrupt", k), mean_of(auc_c));
    emit(seed, t, tagged("auc_dfl", "corrupt", k), mean_of(auc_d));
  }
}

void lemma_check(const ExperimentConfig&, std::uint64_t seed, Emitter& emit) {
  auto rng = stream(seed, kData);
  const auto inst = infotheory::random_lemma1_instance(rng);
  const auto r = infotheory::verify_lemma1(inst, 0);
  emit(seed, 0, "lhs", r.lhs);
  emit(seed, 0, "rhs", r.rhs);
  emit(seed, 0, "abs_diff", std::abs(r.lhs - r.rhs));
}

void toy_mi(const ExperimentConfig& c, std::uint64_t seed, Emitter& emit) {
  auto rng = stream(seed, kData);
  const int max_nodes = std::clamp(c.graph.nodes, 2, 4);
  const auto inst = infotheory::random_toy_instance(rng, max_nodes);
  const auto gap = infotheory::privacy_gap(inst, 0);
  emit(seed, 0, "i_cfl", gap.i_cfl);
  emit(seed, 0, "i_dfl", gap.i_dfl);
  emit(seed, 0, "lower_bound", gap.lower_bound);
  emit(seed, 0, "gap_direct", gap.direct);
  emit(seed, 0, "gap_conditional", gap.conditional);
  emit(seed, 0, "lower_bound_achieved", gap.lower_bound_achieved ? 1.0 : 0.0);
}

}  // namespace

ScenarioResult run_scenario(const ExperimentConfig& cfg) {
  if (auto diags = check_config(cfg); !diags.empty()) throw ConfigError(diags);
  using Runner = void (*)(const ExperimentConfig&, std::uint64_t, Emitter&);
  static const std::vector<std::pair<std::string, Runner>> runners{
      {"logistic_fig2", logistic_trajectory}, {"zvar_sweep", zvar_sweep},
      {"attack_vs_iter", attack_vs_iter},     {"batch_sweep", batch_sweep},
      {"component_sweep", component_sweep},   {"corrupt_fraction", corrupt_fraction},
      {"mia_auc", mia_auc},                   {"lemma1_check", lemma_check},
      {"toy_mi", toy_mi}};
  const auto it = std::find_if(runners.begin(), runners.end(),
                               [&](const auto& r) { return r.first == cfg.scenario; });
  ScenarioResult result{cfg, {}};
  Emitter emit(result.rows, cfg.scenario);
  for (int k = 0; k < cfg.adversary.trials; ++k) it->second(cfg, trial_seed(cfg.seed, k), emit);
  return result;
}

}  // namespace fedleak::experiments
