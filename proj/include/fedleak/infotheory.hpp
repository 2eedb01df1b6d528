#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "fedleak/common.hpp"
#include "fedleak/topology.hpp"

namespace fedleak::infotheory {

using VarList = std::vector<std::string>;

// A probability table over the product of finite alphabets. Values are
// integer codes; CSV-loaded joints keep the original tokens per column.
class DiscreteJoint {
 public:
  using Key = std::vector<std::int64_t>;

  explicit DiscreteJoint(VarList variables);

  // Adds mass to an atom (repeated keys accumulate).
  void add(const Key& values, double p);

  const VarList& variables() const { return variables_; }
  const std::map<Key, double>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  int index_of(std::string_view name) const;
  double total() const;
  // Throws unless the masses sum to 1 within tol.
  void check_normalized(double tol = 1e-12) const;

  std::map<Key, double> marginal(const VarList& vars) const;

  // Token spellings of each column's codes (empty unless loaded from CSV).
  const std::vector<std::vector<std::string>>& alphabets() const { return alphabets_; }

  // Header row names the variables; the last column holds probabilities.
  static DiscreteJoint from_csv(std::string_view text);

 private:
  VarList variables_;
  std::map<Key, double> atoms_;
  std::vector<std::vector<std::string>> alphabets_;
};

// All quantities in bits.
double entropy(const DiscreteJoint& joint, const VarList& vars);
// H(A) + H(B) - H(A u B); overlapping sets are allowed (I(A;A) = H(A)).
double mutual_information(const DiscreteJoint& joint, const VarList& a, const VarList& b);
// I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C).
double conditional_mutual_information(const DiscreteJoint& joint, const VarList& a,
                                      const VarList& b, const VarList& c);

// ---------------------------------------------------------------------------
// Masked sums: I(X_i; {g(X_j)+R_j}_j, sum_j R_j) versus I(X_i; sum_j g(X_j)).

using Pmf = std::vector<std::pair<std::int64_t, double>>;

struct Lemma1Instance {
  std::vector<Pmf> x;                      // one pmf per X_j
  std::map<std::int64_t, std::int64_t> g;  // function table on the X alphabets
  std::vector<Pmf> r;                      // one pmf per R_j
  // All additions are reduced mod this value when present.
  std::optional<std::int64_t> modulus;
};

struct Lemma1Result {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline constexpr std::size_t kAtomBudget = 1'000'000;

// Checks I(X_j; g(X_j)+R_j) < 1e-9 for every j first (an Error names the
// failing index), then evaluates both sides by exact enumeration.
Lemma1Result verify_lemma1(const Lemma1Instance& inst, int i,
                           std::size_t atom_budget = kAtomBudget);

// Uniform bits, identity g, uniform mod-M masks.
Lemma1Instance random_lemma1_instance(std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Toy federated instances with scalar quadratic objectives
// f_j(w) = (w - X_j)^2 / 2, all arithmetic exact.

using Rational = boost::rational<long long>;
using RationalPmf = std::vector<std::pair<Rational, double>>;

struct ToyFlInstance {
  topology::Graph graph;
  std::vector<RationalPmf> x;  // private scalar of each node
  RationalPmf z0;              // alphabet of every z_{j|k}^{(0)}, drawn independently
  std::vector<NodeId> corrupt;
  Rational rho{2, 5};
  Rational theta{1};
  Rational mu{1, 10};  // server step of the centralized protocol
  Rational w0{0};      // shared initial model of the centralized protocol
  int t_max = 2;
};

struct ToyOrdering {
  double i_cfl = 0.0;
  double i_dfl = 0.0;
};

// I(X_i; O_CFL) and I(X_i; O_DFL) for honest node i.
ToyOrdering toy_privacy_ordering(const ToyFlInstance& inst, NodeId i,
                                 std::size_t atom_budget = kAtomBudget);

struct PrivacyGap {
  double direct = 0.0;       // I_cfl - I_dfl
  double conditional = 0.0;  // I(X_i; honest gradients | lower-bound knowledge)
  double lower_bound = 0.0;  // I(X_i; lower-bound knowledge)
  double i_cfl = 0.0;
  double i_dfl = 0.0;
  // |I_dfl - lower_bound| <= 1e-10; the two gap routes coincide only then.
  bool lower_bound_achieved = false;
};

PrivacyGap privacy_gap(const ToyFlInstance& inst, NodeId i,
                       std::size_t atom_budget = kAtomBudget);

// Connected graph on 2..max_nodes nodes, alphabets of size 2..3, random
// corrupt set that leaves node 0 honest.
ToyFlInstance random_toy_instance(std::mt19937_64& rng, int max_nodes = 3);

}  // namespace fedleak::infotheory
