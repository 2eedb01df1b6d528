#include "fedleak/adversary/attacks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "fedleak/adversary/metrics.hpp"

namespace fedleak::adversary {

using objectives::ConstRowMajorMap;
using objectives::GradientVector;
using objectives::MlpModel;
using objectives::MlpShape;

LabelResult recover_label(std::span<const Vec> rows) {
  const int C = static_cast<int>(rows.size());
  for (int c = 0; c < C; ++c) {
    if (rows[c].squaredNorm() == 0.0) continue;
    bool ok = C > 1;
    for (int k = 0; k < C && ok; ++k)
      if (k != c && rows[c].dot(rows[k]) > 0.0) ok = false;
    if (ok) return {true, c};
  }
  return {false, -1};
}

LabelResult recover_label(const GradientVector& gradient) {
  const auto rows = gradient.output_rows();
  return recover_label(std::span<const Vec>(rows));
}

Vec reconstruct_logistic_input(const Vec& grad_diff_w, double grad_diff_b, double floor) {
  if (!(std::abs(grad_diff_b) >= floor)) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "reconstruct_logistic_input: |bias gradient| %.3g is below the floor %.3g",
                  std::abs(grad_diff_b), floor);
    throw Error(msg);
  }
  return grad_diff_w / grad_diff_b;
}

namespace {

double sigmoid(double y) {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

// d/d eps of grad_x CE(params + eps * dir, x, label) at eps = 0, which equals
// grad_x <grad_params CE(params, x, label), dir>.
Vec input_grad_of_inner(const MlpShape& shape, const Vec& params, const Vec& dir, const Vec& x,
                        int label) {
  ConstRowMajorMap w1(params.data() + shape.w1_offset(), shape.hidden, shape.input);
  Eigen::Map<const Vec> b1(params.data() + shape.b1_offset(), shape.hidden);
  ConstRowMajorMap w2(params.data() + shape.w2_offset(), shape.classes, shape.hidden);
  Eigen::Map<const Vec> b2(params.data() + shape.b2_offset(), shape.classes);
  ConstRowMajorMap r1(dir.data() + shape.w1_offset(), shape.hidden, shape.input);
  Eigen::Map<const Vec> rb1(dir.data() + shape.b1_offset(), shape.hidden);
  ConstRowMajorMap r2(dir.data() + shape.w2_offset(), shape.classes, shape.hidden);
  Eigen::Map<const Vec> rb2(dir.data() + shape.b2_offset(), shape.classes);

  const Vec z = w1 * x + b1;
  const Vec zd = r1 * x + rb1;
  const Vec a = z.unaryExpr([](double v) { return sigmoid(v); });
  const Vec s = a.cwiseProduct((1.0 - a.array()).matrix());
  const Vec ad = s.cwiseProduct(zd);

  const Vec y = w2 * a + b2;
  const Vec yd = r2 * a + w2 * ad + rb2;
  Vec p = (y.array() - y.maxCoeff()).exp();
  p /= p.sum();
  const Vec pd = p.cwiseProduct((yd.array() - p.dot(yd)).matrix());
  Vec g = p;
  g[label] -= 1.0;

  const Vec da = w2.transpose() * g;
  const Vec dad = r2.transpose() * g + w2.transpose() * pd;
  const Vec sd = ad.cwiseProduct((1.0 - 2.0 * a.array()).matrix());
  const Vec dz = da.cwiseProduct(s);
  const Vec dzd = dad.cwiseProduct(s) + da.cwiseProduct(sd);
  return r1.transpose() * dz + w1.transpose() * dzd;
}

void check_problem(const InversionProblem& p, std::span<const int> labels) {
  require(p.num_slots > 0, "inversion: no unknown samples");
  require(p.target.size() == p.shape.num_params(), "inversion: target layout does not match model");
  require(static_cast<int>(labels.size()) == p.num_slots, "inversion: one label per slot");
  for (int l : labels) require(l >= 0 && l < p.shape.classes, "inversion: label out of range");
  require(!p.terms.empty(), "inversion: no gradient terms");
  for (const auto& term : p.terms) {
    require(term.params.size() == p.shape.num_params(), "inversion: term parameters mismatch");
    require(!term.slots.empty(), "inversion: empty term");
    for (int k : term.slots) require(k >= 0 && k < p.num_slots, "inversion: slot out of range");
  }
}

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

struct RunOutcome {
  std::vector<Vec> x;
  double objective;
  double initial;
  bool converged;
  std::vector<double> trace;
};

RunOutcome descend(const InversionProblem& problem, std::span<const int> labels,
                   std::vector<Vec> x, int steps, const InversionConfig& cfg) {
  const double goal = cfg.rel_tol * problem.target.squaredNorm();
  std::vector<Vec> grad;
  double J = inversion_objective(problem, x, labels, &grad);
  RunOutcome out{x, J, J, J <= goal, {J}};
  auto grad_norm = [&] {
    double s = 0.0;
    for (const Vec& g : grad) s += g.squaredNorm();
    return std::sqrt(s);
  };
  double gn = grad_norm();
  if (gn == 0.0) return out;
  double step = cfg.initial_move / gn;

  std::vector<Vec> trial(x.size());
  for (int it = 0; it < steps && !out.converged; ++it) {
    bool accepted = false;
    double Jn = J;
    while (!accepted) {
      double moved = 0.0;
      for (size_t k = 0; k < x.size(); ++k) {
        trial[k] = (x[k] - step * grad[k]).unaryExpr(&clip01);
        moved += (trial[k] - x[k]).squaredNorm();
      }
      if (moved == 0.0 || step * gn < 1e-15) break;
      Jn = inversion_objective(problem, trial, labels);
      if (Jn < J)
        accepted = true;
      else
        step *= 0.5;
    }
    if (!accepted) break;  // stationary under the box constraint
    x.swap(trial);
    J = inversion_objective(problem, x, labels, &grad);
    gn = grad_norm();
    out.trace.push_back(J);
    out.converged = J <= goal;
    step *= 2.0;
    if (gn == 0.0) break;
  }
  out.x = std::move(x);
  out.objective = J;
  return out;
}

std::vector<Vec> random_inputs(int slots, int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> x(slots, Vec(dim));
  for (Vec& v : x)
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = unif(rng);
  return x;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

double inversion_objective(const InversionProblem& problem, std::span<const Vec> inputs,
                           std::span<const int> labels, std::vector<Vec>* grad) {
  check_problem(problem, labels);
  require(static_cast<int>(inputs.size()) == problem.num_slots, "inversion: one input per slot");
  for (const Vec& x : inputs)
    require(x.size() == problem.shape.input, "inversion: input dimension mismatch");

  Vec r = -problem.target;
  for (const auto& term : problem.terms) {
    const double scale = term.coef / static_cast<double>(term.slots.size());
    for (int k : term.slots)
      objectives::mlp_accumulate_sample_grad(problem.shape, term.params, inputs[k], labels[k],
                                             scale, r);
  }
  if (grad) {
    grad->assign(problem.num_slots, Vec::Zero(problem.shape.input));
    for (const auto& term : problem.terms) {
      const double scale = 2.0 * term.coef / static_cast<double>(term.slots.size());
      for (int k : term.slots)
        (*grad)[k] += scale * input_grad_of_inner(problem.shape, term.params, r, inputs[k],
                                                  labels[k]);
    }
  }
  return r.squaredNorm();
}

AttackResult invert(const InversionProblem& problem, std::span<const int> labels,
                    const InversionConfig& cfg, std::mt19937_64& rng) {
  check_problem(problem, labels);
  require(cfg.restarts >= 1 && cfg.steps >= 0, "inversion: need at least one restart");
  require(cfg.initial.empty() || static_cast<int>(cfg.initial.size()) == problem.num_slots,
          "inversion: initial point must cover every slot");
  const auto start = std::chrono::steady_clock::now();

  AttackResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<Vec> x0 = cfg.initial.empty()
                              ? random_inputs(problem.num_slots, problem.shape.input, rng)
                              : cfg.initial;
    RunOutcome run = descend(problem, labels, std::move(x0), cfg.steps, cfg);
    if (run.objective < best.objective) {
      best.inputs = std::move(run.x);
      best.objective = run.objective;
      best.initial_objective = run.initial;
      best.converged = run.converged;
      best.trace = std::move(run.trace);
    }
    if (best.converged) break;
  }
  best.labels.assign(labels.begin(), labels.end());
  best.seconds = seconds_since(start);
  return best;
}

AttackResult invert_search(const InversionProblem& problem,
                           std::span<const std::vector<int>> candidates,
                           const InversionConfig& cfg, std::mt19937_64& rng) {
  require(!candidates.empty(), "inversion: no label candidates");
  const auto start = std::chrono::steady_clock::now();
  size_t pick = 0;
  if (candidates.size() > 1) {
    InversionConfig screen = cfg;
    screen.restarts = 1;
    screen.steps = cfg.screen_steps;
    double best = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < candidates.size(); ++c) {
      const double J = invert(problem, candidates[c], screen, rng).objective;
      if (J < best) {
        best = J;
        pick = c;
      }
    }
  }
  AttackResult out = invert(problem, candidates[pick], cfg, rng);
  out.seconds = seconds_since(start);
  return out;
}

std::vector<std::vector<int>> label_tuples(int slots, int num_classes, int limit,
                                           std::mt19937_64& rng) {
  require(slots > 0 && num_classes > 0 && limit > 0, "label_tuples: bad arguments");
  double total = std::pow(static_cast<double>(num_classes), slots);
  std::vector<std::vector<int>> out;
  if (total <= limit) {
    std::vector<int> cur(slots, 0);
    while (true) {
      out.push_back(cur);
      int k = slots - 1;
      while (k >= 0 && ++cur[k] == num_classes) cur[k--] = 0;
      if (k < 0) break;
    }
    return out;
  }
  std::uniform_int_distribution<int> pick(0, num_classes - 1);
  std::set<std::vector<int>> seen;
  while (static_cast<int>(out.size()) < limit) {
    std::vector<int> cur(slots);
    for (int& l : cur) l = pick(rng);
    if (seen.insert(cur).second) out.push_back(cur);
  }
  return out;
}

std::vector<std::vector<int>> label_multisets_by_bias(const Vec& bias_grad_sum, int slots,
                                                      int limit) {
  const int C = static_cast<int>(bias_grad_sum.size());
  require(C > 0 && slots > 0 && limit > 0, "label_multisets_by_bias: bad arguments");
  // bias gradient of one sample is softmax - onehot; softmax ~ 1/C untrained
  const Vec estimate = (static_cast<double>(slots) / C) - bias_grad_sum.array();

  std::vector<std::pair<double, std::vector<int>>> scored;
  std::vector<int> counts(C, 0);
  auto visit = [&](auto&& self, int c, int left) -> void {
    if (c == C - 1) {
      counts[c] = left;
      double err = 0.0;
      std::vector<int> tuple;
      for (int k = 0; k < C; ++k) {
        err += (counts[k] - estimate[k]) * (counts[k] - estimate[k]);
        tuple.insert(tuple.end(), counts[k], k);
      }
      scored.emplace_back(err, std::move(tuple));
      return;
    }
    for (int n = left; n >= 0; --n) {
      counts[c] = n;
      self(self, c + 1, left - n);
    }
  };
  visit(visit, 0, slots);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::vector<int>> out;
  for (auto& [err, tuple] : scored) {
    if (static_cast<int>(out.size()) == limit) break;
    out.push_back(std::move(tuple));
  }
  return out;
}

AttackResult gradient_inversion(const GradientVector& target, const MlpModel& model, int batch,
                                std::optional<std::vector<int>> labels,
                                const InversionConfig& cfg, std::mt19937_64& rng) {
  require(target.shape() == model.shape, "gradient_inversion: model and target layouts differ");
  require(batch >= 1, "gradient_inversion: batch must be >= 1");
  InversionProblem problem{model.shape, batch, {}, target.flat()};
  InversionTerm term{1.0, model.params, {}};
  for (int k = 0; k < batch; ++k) term.slots.push_back(k);
  problem.terms.push_back(std::move(term));

  std::vector<std::vector<int>> candidates;
  if (labels) {
    candidates.push_back(*labels);
  } else if (batch == 1) {
    const LabelResult guess = recover_label(target);
    if (guess.conclusive)
      candidates.push_back({guess.label});
    else
      candidates = label_tuples(1, model.shape.classes, cfg.max_label_candidates, rng);
  } else {
    candidates = label_multisets_by_bias(Vec(target.b2()) * batch, batch,
                                         cfg.max_label_candidates);
  }
  return invert_search(problem, candidates, cfg, rng);
}

AttackResult gradient_difference_inversion(const Vec& target, const MlpModel& before,
                                           const MlpModel& after, int batch,
                                           std::optional<std::vector<int>> labels,
                                           const InversionConfig& cfg, std::mt19937_64& rng) {
  require(before.shape == after.shape, "gradient_difference_inversion: model shapes differ");
  require(batch >= 1, "gradient_difference_inversion: batch must be >= 1");
  InversionProblem problem{before.shape, batch, {}, target};
  std::vector<int> slots;
  for (int k = 0; k < batch; ++k) slots.push_back(k);
  problem.terms.push_back({1.0, after.params, slots});
  problem.terms.push_back({-1.0, before.params, slots});

  std::vector<std::vector<int>> candidates;
  if (labels)
    candidates.push_back(*labels);
  else
    candidates = label_tuples(batch, before.shape.classes, cfg.max_label_candidates, rng);
  return invert_search(problem, candidates, cfg, rng);
}

AttackResult gradient_sum_inversion(const Vec& target, std::span<const MlpModel> member_models,
                                    std::span<const int> batch_sizes,
                                    std::optional<std::vector<int>> labels,
                                    const InversionConfig& cfg, std::mt19937_64& rng) {
  require(!member_models.empty(), "gradient_sum_inversion: component is empty");
  require(member_models.size() == batch_sizes.size(),
          "gradient_sum_inversion: one batch size per member");
  const MlpShape shape = member_models.front().shape;
  InversionProblem problem{shape, 0, {}, target};
  for (size_t j = 0; j < member_models.size(); ++j) {
    require(member_models[j].shape == shape, "gradient_sum_inversion: member shapes differ");
    require(batch_sizes[j] >= 1, "gradient_sum_inversion: batch sizes must be >= 1");
    InversionTerm term{1.0, member_models[j].params, {}};
    for (int k = 0; k < batch_sizes[j]; ++k) term.slots.push_back(problem.num_slots++);
    problem.terms.push_back(std::move(term));
  }

  std::vector<std::vector<int>> candidates;
  if (labels) {
    candidates.push_back(*labels);
  } else if (member_models.size() == 1) {
    return gradient_inversion(GradientVector(shape, target), member_models.front(),
                              batch_sizes.front(), std::nullopt, cfg, rng);
  } else {
    const int per = batch_sizes.front();
    for (int b : batch_sizes)
      require(b == per, "gradient_sum_inversion: label search needs equal batch sizes");
    const Vec bias = GradientVector(shape, target).b2();
    candidates = label_multisets_by_bias(bias * per, problem.num_slots, cfg.max_label_candidates);
  }
  return invert_search(problem, candidates, cfg, rng);
}

void score_attack(AttackResult& result, std::span<const Vec> truth, int rows, int cols) {
  const int n = static_cast<int>(truth.size());
  require(static_cast<int>(result.inputs.size()) == n, "score_attack: sample counts differ");
  Mat cost(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) cost(r, c) = (result.inputs[r] - truth[c]).norm();
  const auto match = greedy_matching(cost);
  result.ssim.assign(n, 0.0);
  result.error.assign(n, 0.0);
  for (int r = 0; r < n; ++r) {
    result.ssim[r] = ssim(result.inputs[r], truth[match[r]], rows, cols);
    result.error[r] = cost(r, match[r]);
  }
}

std::string attack_csv(std::span<const AttackRecord> records) {
  std::string out = "seed,protocol,observable,sample,label,ssim,error,converged\n";
  char buf[128];
  for (const auto& rec : records) {
    require(rec.result != nullptr, "attack_csv: missing result");
    const AttackResult& r = *rec.result;
    require(r.ssim.size() == r.inputs.size(), "attack_csv: result has not been scored");
    for (size_t k = 0; k < r.inputs.size(); ++k) {
      out += std::to_string(rec.seed) + ',' + rec.protocol + ',' + rec.observable + ',';
      std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%d\n", k,
                    k < r.labels.size() ? r.labels[k] : -1, r.ssim[k], r.error[k],
                    r.converged ? 1 : 0);
      out += buf;
    }
  }
  return out;
}

}  // namespace fedleak::adversary
