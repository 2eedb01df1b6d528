#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "fedleak/infotheory.hpp"

namespace fedleak::infotheory {

namespace {

constexpr long long kMagnitudeLimit = 1LL << 31;

// Keeps every intermediate small enough that the next product cannot wrap.
Rational chk(const Rational& r) {
  if (std::llabs(r.numerator()) >= kMagnitudeLimit || r.denominator() >= kMagnitudeLimit)
    throw Error("toy protocol: rational arithmetic left the exact range");
  return r;
}

class Interner {
 public:
  std::int64_t id(const std::vector<Rational>& key) {
    const auto [it, fresh] = ids_.emplace(key, static_cast<std::int64_t>(ids_.size()));
    return it->second;
  }

 private:
  std::map<std::vector<Rational>, std::int64_t> ids_;
};

struct Observed {
  std::vector<Rational> cfl, dfl, lower, grads;
};

class ToyProtocol {
 public:
  explicit ToyProtocol(const ToyFlInstance& inst)
      : inst_(inst), g_(inst.graph), m_(g_.num_edges()), n_(g_.num_nodes()) {
    part_ = topology::honest_partition(g_, inst.corrupt);
  }

  int slots() const { return 2 * m_; }

  // z_{i|j} lives at edge_index(i, j), shifted by m when i is the larger end.
  int slot(NodeId i, NodeId j) const { return g_.edge_index(i, j) + (i < j ? 0 : m_); }

  Observed run(const std::vector<Rational>& x, const std::vector<Rational>& z0) const {
    Observed o;
    const int T = inst_.t_max;
    for (NodeId c : part_.corrupt) {
      o.cfl.push_back(x[c]);
      o.dfl.push_back(x[c]);
      o.lower.push_back(x[c]);
    }

    Rational w = inst_.w0;
    for (int t = 0; t < T; ++t) {
      o.cfl.push_back(w);
      Rational sum = 0;
      for (NodeId j = 0; j < n_; ++j) {
        const Rational grad = chk(w - x[j]);
        o.cfl.push_back(grad);
        sum = chk(sum + grad);
      }
      w = chk(w - chk(inst_.mu * sum / Rational(n_)));
    }

    for (const auto& e : g_.edges())
      if (part_.is_corrupt(e.lo) || part_.is_corrupt(e.hi)) {
        o.dfl.push_back(z0[slot(e.lo, e.hi)]);
        o.dfl.push_back(z0[slot(e.hi, e.lo)]);
      }

    std::vector<Rational> z = z0;
    std::vector<std::vector<Rational>> weights(T, std::vector<Rational>(n_));
    for (int t = 0; t < T; ++t) {
      for (NodeId j = 0; j < n_; ++j) {
        Rational s = 0;
        for (NodeId k : g_.neighbors(j)) s = chk(s + Rational(j < k ? 1 : -1) * z[slot(j, k)]);
        weights[t][j] = chk((x[j] - s) / (Rational(1) + inst_.rho * Rational(g_.degree(j))));
      }
      std::vector<Rational> delta(z.size());
      for (NodeId j = 0; j < n_; ++j)
        for (NodeId k : g_.neighbors(j)) {
          const Rational b = j < k ? 1 : -1;
          delta[slot(k, j)] = chk(inst_.theta * chk(z[slot(j, k)] - z[slot(k, j)] +
                                                    Rational(2) * inst_.rho * b * weights[t][j]));
        }
      for (const auto& e : g_.edges()) {
        o.dfl.push_back(delta[slot(e.hi, e.lo)]);
        o.dfl.push_back(delta[slot(e.lo, e.hi)]);
      }
      for (size_t s = 0; s < z.size(); ++s) z[s] = chk(z[s] + delta[s]);
    }

    for (int t = 0; t < T; ++t)
      for (NodeId j = 0; j < n_; ++j) o.lower.push_back(weights[t][j]);
    for (int t = 0; t < T; ++t)
      for (NodeId c : part_.corrupt) o.lower.push_back(weights[t][c] - x[c]);
    for (int t = 0; t + 1 < T; ++t)
      for (NodeId j : part_.honest) o.lower.push_back(weights[t + 1][j] - weights[t][j]);
    for (int t = 0; t < T; ++t)
      for (const auto& comp : part_.honest_components) {
        Rational s = 0;
        for (NodeId j : comp) s = chk(s + weights[t][j] - x[j]);
        o.lower.push_back(s);
      }
    for (int t = 0; t < T; ++t)
      for (NodeId j : part_.honest) o.grads.push_back(weights[t][j] - x[j]);
    return o;
  }

  const topology::HonestPartition& partition() const { return part_; }

 private:
  const ToyFlInstance& inst_;
  const topology::Graph& g_;
  int m_;
  int n_;
  topology::HonestPartition part_;
};

void check_rational_pmf(const RationalPmf& pmf, const std::string& what) {
  require(!pmf.empty(), "toy instance: empty " + what + " alphabet");
  double total = 0.0;
  std::set<Rational> values;
  for (const auto& [v, p] : pmf) {
    require(p >= 0.0, "toy instance: negative probability in " + what);
    total += p;
    values.insert(v);
  }
  require(values.size() == pmf.size(), "toy instance: repeated value in " + what);
  require(std::abs(total - 1.0) <= 1e-12, "toy instance: " + what + " is not normalized");
}

void validate(const ToyFlInstance& inst, NodeId i) {
  const int n = inst.graph.num_nodes();
  require(n >= 1 && n <= 4, "toy instance: graph must have 1..4 nodes");
  require(static_cast<int>(inst.x.size()) == n, "toy instance: one private pmf per node");
  require(inst.t_max >= 1 && inst.t_max <= 2, "toy instance: t_max must be 1 or 2");
  require(inst.rho > 0, "toy instance: rho must be positive");
  require(inst.theta > 0 && inst.theta <= 1, "toy instance: theta must lie in (0,1]");
  for (int j = 0; j < n; ++j) check_rational_pmf(inst.x[j], "X" + std::to_string(j));
  check_rational_pmf(inst.z0, "z0");
  std::set<NodeId> corrupt;
  for (NodeId c : inst.corrupt) {
    require(c >= 0 && c < n, "toy instance: corrupt node out of range");
    require(corrupt.insert(c).second, "toy instance: corrupt node listed twice");
  }
  require(i >= 0 && i < n, "toy instance: target node out of range");
  require(!corrupt.count(i), "toy instance: target node must be honest");
}

DiscreteJoint enumerate(const ToyFlInstance& inst, NodeId i, std::size_t atom_budget) {
  validate(inst, i);
  const ToyProtocol proto(inst);
  const int n = inst.graph.num_nodes();
  const int slots = proto.slots();

  double atoms = std::pow(static_cast<double>(inst.z0.size()), slots);
  for (const auto& px : inst.x) atoms *= static_cast<double>(px.size());
  if (atoms > static_cast<double>(atom_budget)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "toy instance: %.0f atoms exceed the budget of %zu", atoms,
                  atom_budget);
    throw Error(buf);
  }

  DiscreteJoint joint({"X", "CFL", "DFL", "L", "G"});
  Interner cfl, dfl, lower, grads;
  std::vector<size_t> xi(n, 0), zi(slots, 0);
  std::vector<Rational> x(n), z0(slots);
  while (true) {
    double p = 1.0;
    for (int j = 0; j < n; ++j) {
      x[j] = inst.x[j][xi[j]].first;
      p *= inst.x[j][xi[j]].second;
    }
    for (int s = 0; s < slots; ++s) {
      z0[s] = inst.z0[zi[s]].first;
      p *= inst.z0[zi[s]].second;
    }
    const Observed o = proto.run(x, z0);
    joint.add({static_cast<std::int64_t>(xi[i]), cfl.id(o.cfl), dfl.id(o.dfl), lower.id(o.lower),
               grads.id(o.grads)},
              p);

    int k = 0;
    for (; k < slots; ++k) {
      if (++zi[k] < inst.z0.size()) break;
      zi[k] = 0;
    }
    if (k < slots) continue;
    int j = 0;
    for (; j < n; ++j) {
      if (++xi[j] < inst.x[j].size()) break;
      xi[j] = 0;
    }
    if (j == n) break;
  }
  return joint;
}

RationalPmf random_pmf(std::mt19937_64& rng, int size, int lo, int hi) {
  std::vector<int> pool;
  for (int v = lo; v <= hi; ++v) pool.push_back(v);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::sort(pool.begin(), pool.begin() + size);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  RationalPmf pmf;
  double total = 0.0;
  for (int k = 0; k < size; ++k) {
    pmf.emplace_back(Rational(pool[k]), weight(rng));
    total += pmf.back().second;
  }
  double head = 0.0;
  for (int k = 0; k + 1 < size; ++k) {
    pmf[k].second /= total;
    head += pmf[k].second;
  }
  pmf.back().second = 1.0 - head;
  return pmf;
}

}  // namespace

ToyOrdering toy_privacy_ordering(const ToyFlInstance& inst, NodeId i, std::size_t atom_budget) {
  const DiscreteJoint joint = enumerate(inst, i, atom_budget);
  return {mutual_information(joint, {"X"}, {"CFL"}), mutual_information(joint, {"X"}, {"DFL"})};
}

PrivacyGap privacy_gap(const ToyFlInstance& inst, NodeId i, std::size_t atom_budget) {
  const DiscreteJoint joint = enumerate(inst, i, atom_budget);
  PrivacyGap gap;
  gap.i_cfl = mutual_information(joint, {"X"}, {"CFL"});
  gap.i_dfl = mutual_information(joint, {"X"}, {"DFL"});
  gap.direct = gap.i_cfl - gap.i_dfl;
  gap.lower_bound = mutual_information(joint, {"X"}, {"L"});
  gap.conditional = conditional_mutual_information(joint, {"X"}, {"G"}, {"L"});
  gap.lower_bound_achieved = std::abs(gap.i_dfl - gap.lower_bound) <= 1e-10;
  return gap;
}

ToyFlInstance random_toy_instance(std::mt19937_64& rng, int max_nodes) {
  require(max_nodes >= 2 && max_nodes <= 4, "random_toy_instance: max_nodes must be 2..4");
  std::uniform_int_distribution<int> nodes(2, max_nodes), coin(0, 1), size(2, 3);
  const int n = nodes(rng);
  topology::Graph g = topology::Graph::path(n);
  if (n >= 3 && coin(rng)) g = n == 3 ? topology::Graph::complete(3) : topology::Graph::ring(n);

  ToyFlInstance inst{g, {}, {}, {}};
  for (int j = 0; j < n; ++j) inst.x.push_back(random_pmf(rng, size(rng), -2, 2));
  // Ring on four nodes has eight z slots; keep its alphabet binary.
  inst.z0 = random_pmf(rng, g.num_edges() >= 4 ? 2 : size(rng), -2, 2);
  std::bernoulli_distribution corrupt(0.4);
  for (int j = 1; j < n; ++j)
    if (corrupt(rng)) inst.corrupt.push_back(j);
  inst.theta = coin(rng) ? Rational(1) : Rational(1, 2);
  inst.t_max = 1 + coin(rng);
  return inst;
}

}  // namespace fedleak::infotheory
