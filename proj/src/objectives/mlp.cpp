#include <cmath>

#include "fedleak/objectives.hpp"

namespace fedleak::objectives {

namespace {

double sigmoid(double y) {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

void check_shape(const MlpShape& shape, const Vec& params) {
  require(params.size() == shape.num_params(),
          "mlp: parameter vector has " + std::to_string(params.size()) +
              " entries, shape needs " + std::to_string(shape.num_params()));
}

Vec softmax(const Vec& logits) {
  const double top = logits.maxCoeff();
  Vec p = (logits.array() - top).exp();
  return p / p.sum();
}

}  // namespace

GradientVector::GradientVector(MlpShape shape, Vec flat)
    : shape_(shape), flat_(std::move(flat)) {
  check_shape(shape_, flat_);
}

ConstRowMajorMap GradientVector::w1() const {
  return ConstRowMajorMap(flat_.data() + shape_.w1_offset(), shape_.hidden, shape_.input);
}
Eigen::Map<const Vec> GradientVector::b1() const {
  return Eigen::Map<const Vec>(flat_.data() + shape_.b1_offset(), shape_.hidden);
}
ConstRowMajorMap GradientVector::w2() const {
  return ConstRowMajorMap(flat_.data() + shape_.w2_offset(), shape_.classes, shape_.hidden);
}
Eigen::Map<const Vec> GradientVector::b2() const {
  return Eigen::Map<const Vec>(flat_.data() + shape_.b2_offset(), shape_.classes);
}

Vec GradientVector::output_row(int c) const {
  require(c >= 0 && c < shape_.classes, "output_row: class out of range");
  return w2().row(c).transpose();
}

std::vector<Vec> GradientVector::output_rows() const {
  std::vector<Vec> rows;
  rows.reserve(shape_.classes);
  for (int c = 0; c < shape_.classes; ++c) rows.push_back(output_row(c));
  return rows;
}

MlpModel MlpModel::random(const MlpShape& shape, std::mt19937_64& rng) {
  require(shape.input > 0 && shape.hidden > 0 && shape.classes > 0, "mlp: empty shape");
  MlpModel m{shape, Vec::Zero(shape.num_params())};
  std::normal_distribution<double> g1(0.0, 1.0 / std::sqrt(double(shape.input)));
  std::normal_distribution<double> g2(0.0, 1.0 / std::sqrt(double(shape.hidden)));
  for (int k = 0; k < shape.hidden * shape.input; ++k) m.params[shape.w1_offset() + k] = g1(rng);
  for (int k = 0; k < shape.classes * shape.hidden; ++k) m.params[shape.w2_offset() + k] = g2(rng);
  return m;
}

Vec MlpModel::hidden(const Vec& x) const {
  check_shape(shape, params);
  require(x.size() == shape.input, "mlp: input dimension mismatch");
  ConstRowMajorMap w1(params.data() + shape.w1_offset(), shape.hidden, shape.input);
  Eigen::Map<const Vec> b1(params.data() + shape.b1_offset(), shape.hidden);
  Vec z = w1 * x + b1;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

Vec MlpModel::logits(const Vec& x) const {
  const Vec a = hidden(x);
  ConstRowMajorMap w2(params.data() + shape.w2_offset(), shape.classes, shape.hidden);
  Eigen::Map<const Vec> b2(params.data() + shape.b2_offset(), shape.classes);
  return w2 * a + b2;
}

double cross_entropy(const Vec& logits, int label) {
  require(label >= 0 && label < logits.size(), "cross_entropy: label out of range");
  const double top = logits.maxCoeff();
  const double lse = top + std::log((logits.array() - top).exp().sum());
  return lse - logits[label];
}

void mlp_accumulate_sample_grad(const MlpShape& shape, const Vec& params, const Vec& x,
                                int label, double scale, Vec& out) {
  check_shape(shape, params);
  require(out.size() == params.size(), "mlp: gradient buffer size mismatch");
  require(label >= 0 && label < shape.classes, "mlp: label out of range");
  ConstRowMajorMap w1(params.data() + shape.w1_offset(), shape.hidden, shape.input);
  Eigen::Map<const Vec> b1(params.data() + shape.b1_offset(), shape.hidden);
  ConstRowMajorMap w2(params.data() + shape.w2_offset(), shape.classes, shape.hidden);
  Eigen::Map<const Vec> b2(params.data() + shape.b2_offset(), shape.classes);

  const Vec a = (w1 * x + b1).unaryExpr([](double v) { return sigmoid(v); });
  Vec g = softmax(w2 * a + b2);
  g[label] -= 1.0;  // dCE/dy_c = softmax_c - delta_{c,label}

  RowMajorMap gw1(out.data() + shape.w1_offset(), shape.hidden, shape.input);
  Eigen::Map<Vec> gb1(out.data() + shape.b1_offset(), shape.hidden);
  RowMajorMap gw2(out.data() + shape.w2_offset(), shape.classes, shape.hidden);
  Eigen::Map<Vec> gb2(out.data() + shape.b2_offset(), shape.classes);

  gw2.noalias() += scale * g * a.transpose();
  gb2 += scale * g;
  const Vec delta = (w2.transpose() * g).cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
  gw1.noalias() += scale * delta * x.transpose();
  gb1 += scale * delta;
}

GradientVector mlp_grad(const MlpModel& model, const Dataset& data) {
  check_shape(model.shape, model.params);
  require(data.size() > 0, "mlp_grad: empty dataset");
  require(data.input_dim() == model.shape.input, "mlp_grad: input dimension mismatch");
  Vec out = Vec::Zero(model.params.size());
  const double scale = 1.0 / data.size();
  for (const auto& s : data.samples())
    mlp_accumulate_sample_grad(model.shape, model.params, s.x, s.label, scale, out);
  return GradientVector(model.shape, std::move(out));
}

double mlp_loss(const MlpModel& model, const Dataset& data) {
  require(data.size() > 0, "mlp_loss: empty dataset");
  double total = 0.0;
  for (const auto& s : data.samples()) total += cross_entropy(model.logits(s.x), s.label);
  return total / data.size();
}

MlpObjective::MlpObjective(MlpShape shape, Dataset data, double l2)
    : shape_(shape), data_(std::move(data)), l2_(l2) {
  require(l2 >= 0.0, "MlpObjective: l2 must be non-negative");
  require(data_.input_dim() == shape_.input, "MlpObjective: input dimension mismatch");
  require(data_.num_classes() <= shape_.classes, "MlpObjective: too many classes");
}

double MlpObjective::value(const Vec& w) const {
  return mlp_loss({shape_, w}, data_) + 0.5 * l2_ * w.squaredNorm();
}

Vec MlpObjective::gradient(const Vec& w) const {
  Vec g = mlp_grad({shape_, w}, data_).flat();
  if (l2_ != 0.0) g += l2_ * w;
  return g;
}

}  // namespace fedleak::objectives
