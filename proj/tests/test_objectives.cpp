#include <doctest.h>

#include <cmath>

#include "fedleak/objectives.hpp"
#include "support.hpp"

using namespace fedleak;
using namespace fedleak::objectives;

namespace {

Dataset tiny_binary() {
  Vec a(2), b(2), c(2);
  a << 0.5, -1.0;
  b << -2.0, 0.25;
  c << 1.5, 1.5;
  return Dataset({{a, 1}, {b, 0}, {c, 1}}, 2);
}

Dataset random_images(int count, std::mt19937_64& rng, int side = 4, int classes = 3) {
  return synthetic_image_dataset(1, count, side, classes, rng)[0];
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("csv round trip keeps features and labels") {
    const Dataset d = tiny_binary();
    const Dataset back = Dataset::from_csv(d.to_csv(), 2);
    REQUIRE(back.size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(back[k].label == d[k].label);
      CHECK(testsupport::max_abs_diff(back[k].x, d[k].x) == 0.0);
    }
  }

  TEST_CASE("csv errors name the line") {
    CHECK_THROWS_WITH_AS(Dataset::from_csv("1,2,0\n1,x,1\n", 2),
                         doctest::Contains("line 2"), Error);
    CHECK_THROWS_WITH_AS(Dataset::from_csv("1,2,0.5\n", 2), doctest::Contains("non-integer label"),
                         Error);
  }

  TEST_CASE("inconsistent samples are rejected") {
    CHECK_THROWS_AS(Dataset({{Vec::Zero(2), 0}, {Vec::Zero(3), 0}}, 2), Error);
    CHECK_THROWS_AS(Dataset({{Vec::Zero(2), 2}}, 2), Error);
  }

  TEST_CASE("gaussian data alternates labels around the class means") {
    std::mt19937_64 rng(1);
    const auto nodes = synthetic_gaussian_dataset(200, 2, rng);
    double m0 = 0.0, m1 = 0.0;
    int c0 = 0, c1 = 0;
    int draw = 0;
    for (const auto& d : nodes)
      for (const auto& s : d.samples()) {
        CHECK(s.label == draw++ % 2);
        (s.label ? m1 : m0) += s.x.sum() / 2.0;
        ++(s.label ? c1 : c0);
      }
    CHECK(m0 / c0 == doctest::Approx(-1.0).epsilon(0.1));
    CHECK(m1 / c1 == doctest::Approx(1.0).epsilon(0.1));
  }

  TEST_CASE("image templates are fixed and distinct") {
    const auto a = make_image_templates(8, 4);
    const auto b = make_image_templates(8, 4);
    REQUIRE(a.templates.size() == 4);
    for (int c = 0; c < 4; ++c) {
      CHECK(testsupport::max_abs_diff(a.templates[c], b.templates[c]) == 0.0);
      for (int d = 0; d < c; ++d) CHECK((a.templates[c] - a.templates[d]).cwiseAbs().sum() >= 4.0);
    }
  }

  TEST_CASE("image samples stay near their template inside the unit box") {
    std::mt19937_64 rng(2);
    const auto t = make_image_templates(8, 4);
    for (const auto& d : synthetic_image_dataset(5, 10, 8, 4, rng, 0.15))
      for (const auto& s : d.samples()) {
        CHECK(s.x.minCoeff() >= 0.0);
        CHECK(s.x.maxCoeff() <= 1.0);
        CHECK((s.x - t.templates[s.label]).cwiseAbs().maxCoeff() <= 0.15 + 1e-12);
      }
  }
}

TEST_SUITE("logistic") {
  TEST_CASE("loss at the origin is n log 2") {
    const LogisticModel zero{Vec::Zero(2), 0.0};
    CHECK(logistic_loss(zero, tiny_binary()) == doctest::Approx(3.0 * std::log(2.0)));
  }

  TEST_CASE("gradient matches finite differences") {
    const LogisticObjective f(tiny_binary());
    std::mt19937_64 rng(3);
    for (int k = 0; k < 5; ++k) {
      const Vec w = testsupport::gaussian_vector(3, 1.0, rng);
      const Vec fd = finite_diff_grad([&](const Vec& p) { return f.value(p); }, w, 1e-6);
      CHECK(testsupport::max_abs_diff(f.gradient(w), fd) < 1e-7);
    }
  }

  TEST_CASE("single-sample gradient is a multiple of the augmented input") {
    Vec x(2);
    x << 0.3, -0.7;
    const LogisticObjective f(Dataset({{x, 1}}, 2));
    Vec w(3);
    w << 0.2, 0.1, -0.4;
    const Vec g = f.gradient(w);
    CHECK(testsupport::max_abs_diff(g.head(2) / g[2], x) < 1e-14);
  }

  TEST_CASE("extreme margins do not overflow") {
    Vec x(1);
    x << 1000.0;
    const Dataset d({{x, 0}}, 2);
    const LogisticModel m{Vec::Constant(1, 1.0), 0.0};
    CHECK(logistic_loss(m, d) == doctest::Approx(1000.0));
    CHECK(std::isfinite(logistic_grad(m, d).b));
  }

  TEST_CASE("labels outside {0,1} are rejected") {
    const Dataset d({{Vec::Zero(2), 2}}, 3);
    CHECK_THROWS_AS(logistic_loss({Vec::Zero(2), 0.0}, d), Error);
  }

  TEST_CASE("flat layout round trip") {
    const LogisticModel m{Vec::LinSpaced(3, 1.0, 3.0), -2.0};
    const LogisticModel back = LogisticModel::unflat(m.flat());
    CHECK(back.b == -2.0);
    CHECK(testsupport::max_abs_diff(back.w, m.w) == 0.0);
  }
}

TEST_SUITE("mlp") {
  TEST_CASE("cross entropy equals log-sum-exp minus the true logit") {
    Vec z(3);
    z << 1.0, -2.0, 0.5;
    const double lse = std::log(std::exp(1.0) + std::exp(-2.0) + std::exp(0.5));
    CHECK(cross_entropy(z, 2) == doctest::Approx(lse - 0.5));
    Vec big(2);
    big << 800.0, 0.0;
    CHECK(cross_entropy(big, 1) == doctest::Approx(800.0));
  }

  TEST_CASE("forward pass matches an explicit computation") {
    std::mt19937_64 rng(4);
    const MlpShape shape{4, 3, 2};
    const MlpModel m = MlpModel::random(shape, rng);
    const Vec x = testsupport::gaussian_vector(4, 1.0, rng);
    const GradientVector p(shape, m.params);
    const Vec pre = p.w1() * x + p.b1();
    const Vec a = pre.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    CHECK(testsupport::max_abs_diff(m.hidden(x), a) < 1e-14);
    CHECK(testsupport::max_abs_diff(m.logits(x), p.w2() * a + p.b2()) < 1e-14);
  }

  TEST_CASE("batch gradient matches finite differences") {
    std::mt19937_64 rng(5);
    const MlpShape shape{16, 5, 3};
    const Dataset d = random_images(4, rng);
    for (double l2 : {0.0, 0.3}) {
      const MlpObjective f(shape, d, l2);
      const Vec w = MlpModel::random(shape, rng).params;
      const Vec fd = finite_diff_grad([&](const Vec& p) { return f.value(p); }, w, 1e-6);
      CHECK(testsupport::max_abs_diff(f.gradient(w), fd) < 1e-7);
    }
  }

  TEST_CASE("weight decay adds l2 * w to the gradient and a half squared norm to the value") {
    std::mt19937_64 rng(6);
    const MlpShape shape{16, 4, 3};
    const Dataset d = random_images(2, rng);
    const MlpObjective plain(shape, d), decayed(shape, d, 0.25);
    const Vec w = MlpModel::random(shape, rng).params;
    CHECK(decayed.value(w) == doctest::Approx(plain.value(w) + 0.125 * w.squaredNorm()));
    CHECK(testsupport::max_abs_diff(decayed.gradient(w), plain.gradient(w) + 0.25 * w) < 1e-14);
    CHECK_THROWS_AS(MlpObjective(shape, d, -1.0), Error);
  }

  TEST_CASE("batch mean of per-sample gradients") {
    std::mt19937_64 rng(7);
    const MlpShape shape{16, 4, 3};
    const Dataset d = random_images(3, rng);
    const MlpModel m = MlpModel::random(shape, rng);
    Vec mean = Vec::Zero(shape.num_params());
    for (const auto& s : d.samples()) mean += mlp_grad(m, Dataset({s}, 3)).flat() / 3.0;
    CHECK(testsupport::max_abs_diff(mlp_grad(m, d).flat(), mean) < 1e-14);
  }

  TEST_CASE("gradient views alias the flat layout") {
    const MlpShape shape{3, 2, 2};
    Vec flat = Vec::LinSpaced(shape.num_params(), 0.0, shape.num_params() - 1.0);
    const GradientVector g(shape, flat);
    CHECK(g.w1()(1, 2) == 5.0);
    CHECK(g.b1()(0) == 6.0);
    CHECK(g.w2()(1, 0) == 10.0);
    CHECK(g.b2()(1) == 13.0);
    CHECK(g.output_row(1)(1) == 11.0);
    CHECK(g.output_rows().size() == 2);
    CHECK_THROWS_AS(g.output_row(2), Error);
    CHECK_THROWS_AS(GradientVector(shape, Vec::Zero(3)), Error);
  }

  TEST_CASE("output-bias gradient of one sample is softmax minus one-hot") {
    std::mt19937_64 rng(8);
    const MlpShape shape{16, 4, 3};
    const Dataset d = random_images(1, rng);
    const MlpModel m = MlpModel::random(shape, rng);
    const Vec z = m.logits(d[0].x);
    Vec p = (z.array() - z.maxCoeff()).exp();
    p /= p.sum();
    p[d[0].label] -= 1.0;
    CHECK(testsupport::max_abs_diff(Vec(mlp_grad(m, d).b2()), p) < 1e-14);
  }
}

TEST_SUITE("quadratic") {
  TEST_CASE("value, gradient and target") {
    Vec a(2);
    a << 1.0, -1.0;
    const auto f = quadratic_objective(a);
    CHECK(f->value(Vec::Zero(2)) == doctest::Approx(1.0));
    CHECK(testsupport::max_abs_diff(f->gradient(Vec::Zero(2)), -a) == 0.0);
    REQUIRE(f->quadratic_target() != nullptr);
    const LogisticObjective g(tiny_binary());
    CHECK(g.quadratic_target() == nullptr);
  }
}
