#include <cmath>
#include <cstdio>

#include "fedleak/infotheory.hpp"

namespace fedleak::infotheory {

namespace {

void check_pmf(const Pmf& pmf, const char* what, size_t index) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "verify_lemma1: %s pmf %zu is empty or unnormalized", what, index);
  double total = 0.0;
  for (const auto& [v, p] : pmf) {
    require(p >= 0.0, buf);
    total += p;
  }
  require(!pmf.empty() && std::abs(total - 1.0) <= 1e-12, buf);
}

struct Arith {
  std::optional<std::int64_t> modulus;
  std::int64_t reduce(std::int64_t v) const {
    if (!modulus) return v;
    const std::int64_t m = *modulus;
    return ((v % m) + m) % m;
  }
};

std::int64_t apply_g(const Lemma1Instance& inst, std::int64_t x) {
  const auto it = inst.g.find(x);
  if (it == inst.g.end()) throw Error("verify_lemma1: g is undefined at " + std::to_string(x));
  return it->second;
}

}  // namespace

Lemma1Result verify_lemma1(const Lemma1Instance& inst, int i, std::size_t atom_budget) {
  const size_t n = inst.x.size();
  require(n >= 1, "verify_lemma1: need at least one variable");
  require(inst.r.size() == n, "verify_lemma1: one noise pmf per variable");
  require(i >= 0 && static_cast<size_t>(i) < n, "verify_lemma1: index out of range");
  require(!inst.modulus || *inst.modulus >= 2, "verify_lemma1: modulus must be >= 2");
  for (size_t j = 0; j < n; ++j) {
    check_pmf(inst.x[j], "X", j);
    check_pmf(inst.r[j], "R", j);
  }
  const Arith ar{inst.modulus};

  // Hypothesis: each masked value is independent of its own input.
  for (size_t j = 0; j < n; ++j) {
    DiscreteJoint pair({"X", "Y"});
    for (const auto& [x, px] : inst.x[j])
      for (const auto& [r, pr] : inst.r[j]) pair.add({x, ar.reduce(apply_g(inst, x) + r)}, px * pr);
    const double leak = mutual_information(pair, {"X"}, {"Y"});
    if (!(leak < 1e-9)) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "verify_lemma1: hypothesis violated at index %zu (I(X;g(X)+R) = %.3g bits)",
                    j, leak);
      throw Error(buf);
    }
  }

  double atoms = 1.0;
  for (size_t j = 0; j < n; ++j)
    atoms *= static_cast<double>(inst.x[j].size()) * static_cast<double>(inst.r[j].size());
  if (atoms > static_cast<double>(atom_budget)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "verify_lemma1: %.0f atoms exceed the budget of %zu", atoms,
                  atom_budget);
    throw Error(buf);
  }

  VarList vars{"Xi", "SR", "SG"};
  for (size_t j = 0; j < n; ++j) vars.push_back("Y" + std::to_string(j));
  DiscreteJoint joint(vars);

  std::vector<size_t> xi(n, 0), ri(n, 0);
  DiscreteJoint::Key key(vars.size());
  while (true) {
    double p = 1.0;
    std::int64_t sr = 0, sg = 0;
    for (size_t j = 0; j < n; ++j) {
      const auto& [x, px] = inst.x[j][xi[j]];
      const auto& [r, pr] = inst.r[j][ri[j]];
      p *= px * pr;
      const std::int64_t gx = apply_g(inst, x);
      key[3 + j] = ar.reduce(gx + r);
      sr = ar.reduce(sr + r);
      sg = ar.reduce(sg + gx);
    }
    key[0] = inst.x[i][xi[i]].first;
    key[1] = sr;
    key[2] = sg;
    joint.add(key, p);

    // Mixed-radix increment over (x_0, r_0, x_1, r_1, ...).
    size_t j = 0;
    for (; j < n; ++j) {
      if (++ri[j] < inst.r[j].size()) break;
      ri[j] = 0;
      if (++xi[j] < inst.x[j].size()) break;
      xi[j] = 0;
    }
    if (j == n) break;
  }

  VarList observed{"SR"};
  for (size_t j = 0; j < n; ++j) observed.push_back("Y" + std::to_string(j));
  return {mutual_information(joint, {"Xi"}, observed), mutual_information(joint, {"Xi"}, {"SG"})};
}

Lemma1Instance random_lemma1_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nodes(1, 3), mod(2, 4);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  Lemma1Instance inst;
  const int n = nodes(rng);
  const std::int64_t m = mod(rng);
  inst.modulus = m;
  std::uniform_int_distribution<std::int64_t> value(0, m - 1);
  for (std::int64_t v = 0; v < m; ++v) inst.g[v] = value(rng);
  for (int j = 0; j < n; ++j) {
    Pmf x;
    double total = 0.0;
    for (std::int64_t v = 0; v < m; ++v) {
      x.emplace_back(v, weight(rng));
      total += x.back().second;
    }
    for (auto& [v, p] : x) p /= total;
    // Renormalize exactly enough for the 1e-12 check.
    double s = 0.0;
    for (size_t k = 0; k + 1 < x.size(); ++k) s += x[k].second;
    x.back().second = 1.0 - s;
    inst.x.push_back(std::move(x));

    Pmf r;
    for (std::int64_t v = 0; v < m; ++v) r.emplace_back(v, 1.0 / static_cast<double>(m));
    inst.r.push_back(std::move(r));
  }
  return inst;
}

}  // namespace fedleak::infotheory
