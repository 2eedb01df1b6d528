#include <cmath>
#include <random>

#include <doctest.h>

#include "fedleak/infotheory.hpp"

using namespace fedleak;
using namespace fedleak::infotheory;

namespace {

double h2(double p) { return -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

double pmf_entropy(const RationalPmf& pmf) {
  double h = 0.0;
  for (const auto& [v, p] : pmf)
    if (p > 0) h -= p * std::log2(p);
  return h;
}

DiscreteJoint random_joint(std::mt19937_64& rng, int na, int nb) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(na * nb);
  double total = 0.0;
  for (auto& v : w) total += (v = u(rng));
  DiscreteJoint j({"A", "B"});
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b) j.add({a, b}, w[a * nb + b] / total);
  return j;
}

RationalPmf uniform_pmf(std::initializer_list<int> values) {
  RationalPmf pmf;
  for (int v : values) pmf.emplace_back(Rational(v), 1.0 / static_cast<double>(values.size()));
  return pmf;
}

}  // namespace

TEST_SUITE("entropy") {
  TEST_CASE("uniform over four symbols has two bits") {
    DiscreteJoint j({"X"});
    for (int v = 0; v < 4; ++v) j.add({v}, 0.25);
    CHECK(entropy(j, {"X"}) == doctest::Approx(2.0).epsilon(1e-14));
  }

  TEST_CASE("point mass has zero entropy") {
    DiscreteJoint j({"X"});
    j.add({7}, 1.0);
    CHECK(entropy(j, {"X"}) == 0.0);
  }

  TEST_CASE("two fair bits") {
    DiscreteJoint j({"A", "B"});
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) j.add({a, b}, 0.25);
    CHECK(entropy(j, {"A", "B"}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(entropy(j, {"A"}) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("unknown variables and empty lists are rejected") {
    DiscreteJoint j({"A"});
    j.add({0}, 1.0);
    CHECK_THROWS_WITH_AS(entropy(j, {"Q"}), doctest::Contains("unknown variable 'Q'"), Error);
    CHECK_THROWS_AS(entropy(j, {}), Error);
    CHECK_THROWS_AS(mutual_information(j, {"A"}, {"Q"}), Error);
  }

  TEST_CASE("unnormalized tables are rejected") {
    DiscreteJoint j({"A"});
    j.add({0}, 0.5);
    CHECK_THROWS_AS(entropy(j, {"A"}), Error);
    CHECK_THROWS_AS(j.add({1}, -0.1), Error);
    CHECK_THROWS_AS(j.add({1, 2}, 0.1), Error);
  }

  TEST_CASE("repeated keys accumulate") {
    DiscreteJoint j({"A"});
    j.add({0}, 0.25);
    j.add({0}, 0.25);
    j.add({1}, 0.5);
    CHECK(j.size() == 2);
    CHECK(entropy(j, {"A"}) == doctest::Approx(1.0));
  }
}

TEST_SUITE("mutual information") {
  TEST_CASE("independent variables share nothing") {
    DiscreteJoint j({"A", "B"});
    const double pa[] = {0.3, 0.7}, pb[] = {0.2, 0.5, 0.3};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 3; ++b) j.add({a, b}, pa[a] * pb[b]);
    CHECK(std::abs(mutual_information(j, {"A"}, {"B"})) < 1e-12);
  }

  TEST_CASE("a copy of a uniform 4-ary variable carries two bits") {
    DiscreteJoint j({"A", "B"});
    for (int v = 0; v < 4; ++v) j.add({v, v}, 0.25);
    CHECK(mutual_information(j, {"A"}, {"B"}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(mutual_information(j, {"A"}, {"A"}) == doctest::Approx(2.0).epsilon(1e-14));
  }

  TEST_CASE("binary symmetric channel matches the closed form") {
    const double p = 0.11;
    DiscreteJoint j({"X", "Y"});
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) j.add({x, y}, 0.5 * (x == y ? 1 - p : p));
    const double expected = 1.0 - h2(p);
    CHECK(std::abs(mutual_information(j, {"X"}, {"Y"}) - expected) < 1e-6);
    CHECK(expected == doctest::Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("xor: pairwise independent, conditionally dependent") {
    DiscreteJoint j({"X", "Y", "Z"});
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) j.add({x, y, x ^ y}, 0.25);
    CHECK(std::abs(mutual_information(j, {"X"}, {"Y"})) < 1e-12);
    CHECK(conditional_mutual_information(j, {"X"}, {"Y"}, {"Z"}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(conditional_mutual_information(j, {"X"}, {"Y"}, {}) ==
          doctest::Approx(mutual_information(j, {"X"}, {"Y"})));
  }

  TEST_CASE("symmetry and the entropy ceiling hold on random joints") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
      const auto j = random_joint(rng, 2 + trial % 4, 2 + trial % 3);
      const double ab = mutual_information(j, {"A"}, {"B"});
      const double ba = mutual_information(j, {"B"}, {"A"});
      CHECK(std::abs(ab - ba) < 1e-12);
      CHECK(ab >= -1e-12);
      CHECK(ab <= std::min(entropy(j, {"A"}), entropy(j, {"B"})) + 1e-12);
    }
  }

  TEST_CASE("post-processing never adds information") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 30; ++trial) {
      const auto j = random_joint(rng, 3, 5);
      // T(B) = B mod 2, attached as a third column.
      DiscreteJoint ext({"A", "B", "TB"});
      for (const auto& [key, p] : j.atoms()) ext.add({key[0], key[1], key[1] % 2}, p);
      CHECK(mutual_information(ext, {"A"}, {"TB"}) <=
            mutual_information(ext, {"A"}, {"B"}) + 1e-12);
    }
  }
}

TEST_SUITE("joint csv") {
  TEST_CASE("loads tokens and probabilities") {
    const auto j = DiscreteJoint::from_csv(
        "X,Y,p\n"
        "# comment\n"
        "a,0,0.25\n"
        "a,1,0.25\n"
        "b,0,0.5\n");
    CHECK(j.variables() == VarList{"X", "Y"});
    CHECK(j.alphabets()[0] == std::vector<std::string>{"a", "b"});
    CHECK(entropy(j, {"X"}) == doctest::Approx(1.0));
    CHECK(entropy(j, {"X", "Y"}) == doctest::Approx(1.5));
  }

  TEST_CASE("malformed tables name the line") {
    CHECK_THROWS_WITH_AS(DiscreteJoint::from_csv("X,p\na,0.5,1\n"),
                         doctest::Contains("line 2"), Error);
    CHECK_THROWS_WITH_AS(DiscreteJoint::from_csv("X,p\na,half\n"),
                         doctest::Contains("bad probability"), Error);
    CHECK_THROWS_AS(DiscreteJoint::from_csv("X,p\na,0.4\n"), Error);
    CHECK_THROWS_AS(DiscreteJoint::from_csv(""), Error);
    CHECK_THROWS_AS(DiscreteJoint::from_csv("X,X,p\na,b,1\n"), Error);
  }
}

TEST_SUITE("masked sums") {
  Lemma1Instance two_bits() {
    Lemma1Instance inst;
    inst.modulus = 2;
    inst.g = {{0, 0}, {1, 1}};
    for (int j = 0; j < 2; ++j) {
      inst.x.push_back({{0, 0.5}, {1, 0.5}});
      inst.r.push_back({{0, 0.5}, {1, 0.5}});
    }
    return inst;
  }

  TEST_CASE("two masked bits: both sides agree") {
    const auto r = verify_lemma1(two_bits(), 0);
    CHECK(std::abs(r.lhs - r.rhs) < 1e-10);
    // X_0 xor X_1 with fair bits tells nothing about X_0.
    CHECK(std::abs(r.rhs) < 1e-12);
  }

  TEST_CASE("biased inputs leak through the sum on both sides") {
    Lemma1Instance inst = two_bits();
    inst.modulus = 3;
    inst.g = {{0, 0}, {1, 1}};
    for (auto& x : inst.x) x = {{0, 0.3}, {1, 0.7}};
    for (auto& r : inst.r) r = {{0, 1.0 / 3}, {1, 1.0 / 3}, {2, 1.0 - 2.0 / 3}};
    const auto res = verify_lemma1(inst, 1);
    CHECK(res.rhs > 0.05);
    CHECK(std::abs(res.lhs - res.rhs) < 1e-10);
  }

  TEST_CASE("constant g reveals nothing") {
    Lemma1Instance inst = two_bits();
    inst.g = {{0, 1}, {1, 1}};
    const auto r = verify_lemma1(inst, 1);
    CHECK(std::abs(r.lhs) < 1e-12);
    CHECK(std::abs(r.rhs) < 1e-12);
  }

  TEST_CASE("single variable reduces to I(X; g(X))") {
    Lemma1Instance inst;
    inst.modulus = 4;
    inst.g = {{0, 0}, {1, 2}, {2, 2}, {3, 1}};
    inst.x.push_back({{0, 0.1}, {1, 0.2}, {2, 0.3}, {3, 0.4}});
    inst.r.push_back({{0, 0.25}, {1, 0.25}, {2, 0.25}, {3, 0.25}});
    const auto r = verify_lemma1(inst, 0);
    // Oracle: H(g(X)) with g(X) in {0:0.1, 2:0.5, 1:0.4}.
    const double hg = -(0.1 * std::log2(0.1) + 0.5 * std::log2(0.5) + 0.4 * std::log2(0.4));
    CHECK(r.rhs == doctest::Approx(hg).epsilon(1e-12));
    CHECK(std::abs(r.lhs - r.rhs) < 1e-10);
  }

  TEST_CASE("violated hypothesis names the index") {
    Lemma1Instance inst = two_bits();
    inst.r[1] = {{0, 1.0}};
    CHECK_THROWS_WITH_AS(verify_lemma1(inst, 0), doctest::Contains("index 1"), Error);
  }

  TEST_CASE("bad inputs are rejected") {
    Lemma1Instance inst = two_bits();
    CHECK_THROWS_AS(verify_lemma1(inst, 2), Error);
    inst.g.erase(1);
    CHECK_THROWS_AS(verify_lemma1(inst, 0), Error);
    inst = two_bits();
    inst.x[0] = {{0, 0.5}};
    CHECK_THROWS_AS(verify_lemma1(inst, 0), Error);
    inst = two_bits();
    CHECK_THROWS_AS(verify_lemma1(inst, 0, 8), Error);
  }

  TEST_CASE("random masked instances satisfy the identity") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
      const auto inst = random_lemma1_instance(rng);
      std::uniform_int_distribution<int> pick(0, static_cast<int>(inst.x.size()) - 1);
      const auto r = verify_lemma1(inst, pick(rng));
      CHECK(std::abs(r.lhs - r.rhs) < 1e-10);
    }
  }
}

TEST_SUITE("toy privacy") {
  ToyFlInstance path3() {
    ToyFlInstance inst{topology::Graph::path(3), {}, {}, {}};
    for (int j = 0; j < 3; ++j) inst.x.push_back(uniform_pmf({0, 1, 2}));
    inst.z0 = uniform_pmf({-1, 0, 1});
    inst.t_max = 2;
    return inst;
  }

  TEST_CASE("centralized knowledge reveals the private value") {
    const auto inst = path3();
    const auto r = toy_privacy_ordering(inst, 1);
    CHECK(r.i_cfl == doctest::Approx(pmf_entropy(inst.x[1])).epsilon(1e-12));
    CHECK(r.i_dfl <= r.i_cfl + 1e-10);
  }

  TEST_CASE("degenerate z0 alphabet closes the gap") {
    auto inst = path3();
    inst.z0 = {{Rational(0), 1.0}};
    for (NodeId i : {0, 1, 2}) {
      const auto r = toy_privacy_ordering(inst, i);
      CHECK(std::abs(r.i_cfl - r.i_dfl) < 1e-10);
    }
    inst.z0 = {{Rational(3, 2), 1.0}};
    const auto gap = privacy_gap(inst, 1);
    CHECK(std::abs(gap.direct) < 1e-10);
  }

  TEST_CASE("a lone honest node has no gap") {
    auto inst = path3();
    inst.corrupt = {0, 2};
    const auto gap = privacy_gap(inst, 1);
    CHECK(std::abs(gap.direct) < 1e-10);
    CHECK(std::abs(gap.conditional) < 1e-10);
    CHECK(gap.lower_bound_achieved);
  }

  TEST_CASE("noise hides something from the eavesdropper") {
    const auto r = toy_privacy_ordering(path3(), 1);
    CHECK(r.i_dfl < r.i_cfl - 1e-3);
  }

  TEST_CASE("both gap routes agree when the lower bound is achieved") {
    std::mt19937_64 rng(31);
    int achieved = 0;
    for (int k = 0; k < 25; ++k) {
      const auto inst = random_toy_instance(rng);
      const auto gap = privacy_gap(inst, 0);
      CHECK(gap.direct >= -1e-10);
      CHECK(gap.i_dfl <= gap.i_cfl + 1e-10);
      CHECK(gap.lower_bound <= gap.i_dfl + 1e-10);
      if (gap.lower_bound_achieved) {
        ++achieved;
        CHECK(std::abs(gap.direct - gap.conditional) < 1e-10);
      }
    }
    CHECK(achieved > 0);
  }

  TEST_CASE("admm averaging is supported") {
    auto inst = path3();
    inst.theta = Rational(1, 2);
    const auto r = toy_privacy_ordering(inst, 0);
    CHECK(r.i_dfl <= r.i_cfl + 1e-10);
  }

  TEST_CASE("invalid instances are rejected") {
    auto inst = path3();
    inst.corrupt = {1};
    CHECK_THROWS_WITH_AS(toy_privacy_ordering(inst, 1), doctest::Contains("honest"), Error);
    inst = path3();
    CHECK_THROWS_WITH_AS(toy_privacy_ordering(inst, 0, 100), doctest::Contains("budget"), Error);
    inst.t_max = 3;
    CHECK_THROWS_AS(toy_privacy_ordering(inst, 0), Error);
    inst = path3();
    inst.x.pop_back();
    CHECK_THROWS_AS(toy_privacy_ordering(inst, 0), Error);
    inst = path3();
    inst.z0 = {{Rational(0), 0.5}, {Rational(0), 0.5}};
    CHECK_THROWS_AS(toy_privacy_ordering(inst, 0), Error);
  }
}
