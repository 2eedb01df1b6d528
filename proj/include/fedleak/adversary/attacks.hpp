#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fedleak/common.hpp"
#include "fedleak/objectives.hpp"

namespace fedleak::adversary {

// ---------------------------------------------------------------------------
// Label recovery from output-layer gradient rows.

struct LabelResult {
  bool conclusive = false;
  int label = -1;
};

// A class qualifies when its (nonzero) row has a non-positive inner product
// with every other row. The smallest qualifying class wins; no qualifying
// class gives an inconclusive result.
LabelResult recover_label(std::span<const Vec> output_rows);
LabelResult recover_label(const objectives::GradientVector& gradient);

// ---------------------------------------------------------------------------
// Logistic regression, one sample: grad_w = s x and grad_b = s for a scalar s,
// so x = grad_w / grad_b (the same holds for gradient differences).

Vec reconstruct_logistic_input(const Vec& grad_diff_w, double grad_diff_b,
                               double floor = 1e-12);

// ---------------------------------------------------------------------------
// Optimization-based inversion for the two-layer MLP.

// coef * (batch mean of per-sample gradients at `params` over `slots`).
struct InversionTerm {
  double coef = 1.0;
  Vec params;
  std::vector<int> slots;
};

// Unknown samples x'_0..x'_{k-1}; objective || sum_terms - target ||^2.
struct InversionProblem {
  objectives::MlpShape shape;
  int num_slots = 0;
  std::vector<InversionTerm> terms;
  Vec target;
};

struct InversionConfig {
  int steps = 2000;
  int restarts = 5;
  // Length of the first trial move, relative to the search gradient norm.
  double initial_move = 0.1;
  // Converged once objective <= rel_tol * ||target||^2.
  double rel_tol = 1e-10;
  // Label tuples tried when labels are searched.
  int max_label_candidates = 16;
  // Steps of the single screening restart run for each candidate tuple.
  int screen_steps = 150;
  // Optional starting point shared by all restarts (else uniform in [0,1]).
  std::vector<Vec> initial;
};

struct AttackResult {
  std::vector<Vec> inputs;
  std::vector<int> labels;
  double objective = 0.0;
  double initial_objective = 0.0;
  bool converged = false;
  // Objective at the start and after every accepted step of the best restart.
  std::vector<double> trace;
  double seconds = 0.0;
  // Filled by score_attack against ground truth held by the harness.
  std::vector<double> ssim;
  std::vector<double> error;
};

// Objective value and its gradient with respect to every slot's input.
double inversion_objective(const InversionProblem& problem, std::span<const Vec> inputs,
                           std::span<const int> labels, std::vector<Vec>* grad = nullptr);

// Projected gradient descent on [0,1]^v with step halving, fixed labels.
AttackResult invert(const InversionProblem& problem, std::span<const int> labels,
                    const InversionConfig& cfg, std::mt19937_64& rng);

// Screens each candidate label tuple with a short run, then solves fully
// with the best one.
AttackResult invert_search(const InversionProblem& problem,
                           std::span<const std::vector<int>> candidates,
                           const InversionConfig& cfg, std::mt19937_64& rng);

// All tuples over num_classes when there are at most `limit`, otherwise
// `limit` distinct tuples drawn uniformly.
std::vector<std::vector<int>> label_tuples(int slots, int num_classes, int limit,
                                           std::mt19937_64& rng);

// Label multisets ordered by how well their class counts explain the
// output-bias part of a summed single-sample gradient (at most `limit`).
std::vector<std::vector<int>> label_multisets_by_bias(const Vec& bias_grad_sum, int slots,
                                                      int limit);

// Inverts one observed batch gradient. With labels absent, n_i = 1 uses the
// sign test and larger batches search multisets.
AttackResult gradient_inversion(const objectives::GradientVector& target,
                                const objectives::MlpModel& model, int batch,
                                std::optional<std::vector<int>> labels,
                                const InversionConfig& cfg, std::mt19937_64& rng);

// Inverts grad f(w^{(t+1)}) - grad f(w^{(t)}) of one node.
AttackResult gradient_difference_inversion(const Vec& target, const objectives::MlpModel& before,
                                           const objectives::MlpModel& after, int batch,
                                           std::optional<std::vector<int>> labels,
                                           const InversionConfig& cfg, std::mt19937_64& rng);

// Jointly inverts sum_j grad f_j(w_j) over the members of one honest
// component; member j contributes batch_sizes[j] unknown samples.
AttackResult gradient_sum_inversion(const Vec& target,
                                    std::span<const objectives::MlpModel> member_models,
                                    std::span<const int> batch_sizes,
                                    std::optional<std::vector<int>> labels,
                                    const InversionConfig& cfg, std::mt19937_64& rng);

// Greedily matches reconstructions to truths and fills ssim/error per truth.
void score_attack(AttackResult& result, std::span<const Vec> truth, int rows, int cols);

struct AttackRecord {
  std::uint64_t seed = 0;
  std::string protocol;
  std::string observable;
  const AttackResult* result = nullptr;
};

// One row per reconstructed sample:
// seed,protocol,observable,sample,label,ssim,error,converged
std::string attack_csv(std::span<const AttackRecord> records);

}  // namespace fedleak::adversary
