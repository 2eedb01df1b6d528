#pragma once

#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/common.hpp"

namespace fedleak::objectives {

struct Sample {
  Vec x;
  int label = 0;
};

// Local dataset of one node. All samples share the input dimension.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Sample> samples, int num_classes);

  int size() const { return static_cast<int>(samples_.size()); }
  int input_dim() const { return dim_; }
  int num_classes() const { return classes_; }
  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& operator[](int k) const { return samples_.at(k); }

  // One row per sample: features, then the label in the last column.
  std::string to_csv() const;
  static Dataset from_csv(std::string_view text, int num_classes);

 private:
  std::vector<Sample> samples_;
  int dim_ = 0;
  int classes_ = 0;
};

// Local cost f_i over a flat parameter vector.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec& w) const = 0;
  virtual Vec gradient(const Vec& w) const = 0;
  // Target vector when f(w) = 1/2 ||w - a||^2, else nullptr.
  virtual const Vec* quadratic_target() const { return nullptr; }
};

using ObjectivePtr = std::shared_ptr<const Objective>;

// f(w) = 1/2 ||w - a||^2.
class QuadraticObjective final : public Objective {
 public:
  explicit QuadraticObjective(Vec target) : a_(std::move(target)) {}
  int dim() const override { return static_cast<int>(a_.size()); }
  double value(const Vec& w) const override { return 0.5 * (w - a_).squaredNorm(); }
  Vec gradient(const Vec& w) const override { return w - a_; }
  const Vec* quadratic_target() const override { return &a_; }

 private:
  Vec a_;
};

ObjectivePtr quadratic_objective(Vec target);

// ---------------------------------------------------------------------------
// Logistic regression. Parameters are laid out as [w (v entries), b].

struct LogisticModel {
  Vec w;
  double b = 0.0;

  Vec flat() const;
  static LogisticModel unflat(const Vec& params);
};

struct LogisticGradient {
  Vec w;
  double b = 0.0;
};

// Negative log-likelihood summed over the samples. Labels must be 0 or 1.
double logistic_loss(const LogisticModel& model, const Dataset& data);
LogisticGradient logistic_grad(const LogisticModel& model, const Dataset& data);

class LogisticObjective final : public Objective {
 public:
  explicit LogisticObjective(Dataset data);
  int dim() const override { return data_.input_dim() + 1; }
  double value(const Vec& w) const override;
  Vec gradient(const Vec& w) const override;
  const Dataset& data() const { return data_; }

 private:
  Dataset data_;
};

// ---------------------------------------------------------------------------
// Two-layer perceptron: x -> sigmoid(W1 x + b1) -> W2 a + b2 (logits).
// Flat layout: W1 (hidden x input, row-major), b1, W2 (classes x hidden,
// row-major), b2.

struct MlpShape {
  int input = 0;
  int hidden = 0;
  int classes = 0;

  int num_params() const { return hidden * input + hidden + classes * hidden + classes; }
  int w1_offset() const { return 0; }
  int b1_offset() const { return hidden * input; }
  int w2_offset() const { return hidden * input + hidden; }
  int b2_offset() const { return hidden * input + hidden + classes * hidden; }
  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Named aliases into a flat parameter or gradient vector.
class GradientVector {
 public:
  GradientVector(MlpShape shape, Vec flat);
  const MlpShape& shape() const { return shape_; }
  const Vec& flat() const { return flat_; }
  Vec& flat() { return flat_; }

  ConstRowMajorMap w1() const;
  Eigen::Map<const Vec> b1() const;
  ConstRowMajorMap w2() const;
  Eigen::Map<const Vec> b2() const;
  // Output-layer weight row of class c (length hidden).
  Vec output_row(int c) const;
  std::vector<Vec> output_rows() const;

 private:
  MlpShape shape_;
  Vec flat_;
};

struct MlpModel {
  MlpShape shape;
  Vec params;

  // Small Gaussian initialization (std 1/sqrt(fan_in)), zero biases.
  static MlpModel random(const MlpShape& shape, std::mt19937_64& rng);
  Vec logits(const Vec& x) const;
  Vec hidden(const Vec& x) const;
};

double cross_entropy(const Vec& logits, int label);

// Gradient of the batch-mean cross-entropy.
GradientVector mlp_grad(const MlpModel& model, const Dataset& data);
double mlp_loss(const MlpModel& model, const Dataset& data);
// Adds scale * grad of cross-entropy of one sample into `out`.
void mlp_accumulate_sample_grad(const MlpShape& shape, const Vec& params, const Vec& x,
                                int label, double scale, Vec& out);

// Batch-mean cross-entropy plus (l2 / 2) * ||w||^2.
class MlpObjective final : public Objective {
 public:
  MlpObjective(MlpShape shape, Dataset data, double l2 = 0.0);
  int dim() const override { return shape_.num_params(); }
  double value(const Vec& w) const override;
  Vec gradient(const Vec& w) const override;
  const MlpShape& shape() const { return shape_; }
  const Dataset& data() const { return data_; }
  double l2() const { return l2_; }

 private:
  MlpShape shape_;
  Dataset data_;
  double l2_;
};

// ---------------------------------------------------------------------------

using ScalarFunction = std::function<double(const Vec&)>;

// Coordinate-wise central differences.
Vec finite_diff_grad(const ScalarFunction& f, const Vec& point, double h);

// Class 0 ~ N((-1,-1), I), class 1 ~ N((1,1), I); labels alternate across
// draws so both classes appear equally often.
std::vector<Dataset> synthetic_gaussian_dataset(int nodes, int per_node,
                                                std::mt19937_64& rng);

struct ImageTemplates {
  int side = 0;
  std::vector<Vec> templates;  // one per class, row-major side x side in [0,1]
};

// Fixed, distinct per-class templates (independent of any rng).
ImageTemplates make_image_templates(int side, int num_classes);

// Samples are template + uniform noise in [-noise, noise], clipped to [0,1].
// Labels are drawn uniformly.
std::vector<Dataset> synthetic_image_dataset(int nodes, int per_node, int side,
                                             int num_classes, std::mt19937_64& rng,
                                             double noise = 0.15);

}  // namespace fedleak::objectives
