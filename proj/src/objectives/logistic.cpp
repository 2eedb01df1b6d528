#include <cmath>

#include "fedleak/objectives.hpp"

namespace fedleak::objectives {

namespace {

// log(1 + e^y) without overflow.
double softplus(double y) {
  return y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
}

double sigmoid(double y) {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

void check_binary(const Dataset& data) {
  for (const auto& s : data.samples())
    require(s.label == 0 || s.label == 1, "logistic: labels must be 0 or 1, got " +
                                              std::to_string(s.label));
}

}  // namespace

ObjectivePtr quadratic_objective(Vec target) {
  return std::make_shared<QuadraticObjective>(std::move(target));
}

Vec LogisticModel::flat() const {
  Vec p(w.size() + 1);
  p.head(w.size()) = w;
  p[w.size()] = b;
  return p;
}

LogisticModel LogisticModel::unflat(const Vec& params) {
  require(params.size() >= 1, "LogisticModel: empty parameter vector");
  return {params.head(params.size() - 1), params[params.size() - 1]};
}

double logistic_loss(const LogisticModel& model, const Dataset& data) {
  check_binary(data);
  double loss = 0.0;
  for (const auto& s : data.samples()) {
    const double y = model.w.dot(s.x) + model.b;
    // -[l log sigma(y) + (1-l) log(1 - sigma(y))]
    loss += s.label == 1 ? softplus(-y) : softplus(y);
  }
  return loss;
}

LogisticGradient logistic_grad(const LogisticModel& model, const Dataset& data) {
  check_binary(data);
  LogisticGradient g{Vec::Zero(model.w.size()), 0.0};
  for (const auto& s : data.samples()) {
    const double r = sigmoid(model.w.dot(s.x) + model.b) - s.label;
    g.w += r * s.x;
    g.b += r;
  }
  return g;
}

LogisticObjective::LogisticObjective(Dataset data) : data_(std::move(data)) {
  check_binary(data_);
}

double LogisticObjective::value(const Vec& w) const {
  return logistic_loss(LogisticModel::unflat(w), data_);
}

Vec LogisticObjective::gradient(const Vec& w) const {
  const auto g = logistic_grad(LogisticModel::unflat(w), data_);
  return LogisticModel{g.w, g.b}.flat();
}

Vec finite_diff_grad(const ScalarFunction& f, const Vec& point, double h) {
  require(h > 0.0, "finite_diff_grad: step must be positive");
  Vec g(point.size());
  Vec probe = point;
  for (Eigen::Index k = 0; k < point.size(); ++k) {
    probe[k] = point[k] + h;
    const double up = f(probe);
    probe[k] = point[k] - h;
    const double down = f(probe);
    probe[k] = point[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace fedleak::objectives
