#pragma once

#include <random>
#include <vector>

#include "fedleak/objectives.hpp"
#include "fedleak/protocols.hpp"
#include "fedleak/topology.hpp"

namespace testsupport {

using fedleak::Vec;

inline std::vector<fedleak::objectives::ObjectivePtr> random_quadratics(int n, int dim,
                                                                        std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<fedleak::objectives::ObjectivePtr> out;
  for (int i = 0; i < n; ++i) {
    Vec a(dim);
    for (auto& v : a) v = g(rng);
    out.push_back(fedleak::objectives::quadratic_objective(a));
  }
  return out;
}

inline Vec gaussian_vector(Eigen::Index dim, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, stddev);
  Vec v(dim);
  for (auto& x : v) x = g(rng);
  return v;
}

// Largest entry-wise deviation between two vectors.
inline double max_abs_diff(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testsupport
