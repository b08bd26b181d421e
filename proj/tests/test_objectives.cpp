#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "egl/objectives.hpp"

using namespace egl;

TEST_CASE("shifted sphere evaluates squared distance from its optimum") {
  Objective obj = make_benchmark("sphere", 2, 11);
  Vec d(2);
  d << 3.0, 4.0;
  // x_opt lies in [-4,4]^2 so x_opt + (3,4) can poke out of the box; evaluate
  // the pure function directly.
  CHECK(obj.eval(*obj.x_star + d) == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("every family has value zero at its recorded optimum") {
  for (const auto& name : benchmark_names()) {
    const int dim = 3;
    Objective obj = make_benchmark(name, dim, 5);
    REQUIRE(obj.x_star.has_value());
    REQUIRE(obj.y_star.has_value());
    CHECK(std::abs(obj.eval(*obj.x_star) - *obj.y_star) <= 1e-12);
    CHECK(*obj.y_star == 0.0);
  }
}

TEST_CASE("rastrigin minimum is zero at its center") {
  Objective obj = make_benchmark("rastrigin", 2, 42);
  CHECK(obj.eval(*obj.x_star) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rosenbrock 2d vanishes on the known minimizer") {
  auto base = benchmark_base("rosenbrock", 2);
  CHECK(base(Vec::Zero(2)) == 0.0);
  Vec z(2);
  z << 0.0, -1.0;  // w = (1, 0): 100*(0-1)^2 + 0
  CHECK(base(z) == doctest::Approx(100.0));
}

TEST_CASE("step ellipsoid is constant within a quantization cell") {
  Objective obj = make_benchmark("step_ellipsoid", 2, 3);
  // brute-force: sample offsets in rotated coordinates until two distinct
  // points land in the same cell, then compare raw evaluations
  Rng rng(1);
  const Mat rot_t = obj.rotation.transpose();
  bool found = false;
  for (int tries = 0; tries < 1000 && !found; ++tries) {
    Vec z1 = rng.uniform_vec(2, -2.0, 2.0);
    Vec z2 = z1 + rng.uniform_vec(2, -0.1, 0.1);
    auto cell = [](const Vec& z) {
      return std::make_pair(std::round(z[0] * 2.0), std::round(z[1] * 2.0));
    };
    if (cell(z1) == cell(z2) && cell(z1) != cell(Vec::Zero(2))) {
      const double y1 = obj.eval(*obj.x_star + rot_t * z1);
      const double y2 = obj.eval(*obj.x_star + rot_t * z2);
      CHECK(y1 == doctest::Approx(y2).epsilon(1e-12));
      CHECK(y1 > 0.0);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("rotated families agree with their unrotated base") {
  for (const auto& name : {"rosenbrock", "step_ellipsoid", "sharp_ridge", "schaffer_f7",
                           "griewank_rosenbrock"}) {
    Objective obj = make_benchmark(name, 3, 17);
    auto base = benchmark_base(name, 3);
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
      const Vec z = rng.uniform_vec(3, -1.5, 1.5);
      const Vec x = *obj.x_star + obj.rotation.transpose() * z;
      CHECK(std::abs(obj.eval(x) - base(z)) <= 1e-10 * std::max(1.0, std::abs(base(z))));
    }
  }
}

TEST_CASE("instances are deterministic in the instance seed") {
  Objective a = make_benchmark("schaffer_f7", 4, 123);
  Objective b = make_benchmark("schaffer_f7", 4, 123);
  Objective c = make_benchmark("schaffer_f7", 4, 124);
  CHECK((a.shift - b.shift).norm() == 0.0);
  CHECK((a.rotation - b.rotation).norm() == 0.0);
  CHECK((a.shift - c.shift).norm() > 0.0);
}

TEST_CASE("all families stay finite across the domain") {
  Rng rng(8);
  for (const auto& name : benchmark_names()) {
    Objective obj = make_benchmark(name, 5, 9);
    for (int i = 0; i < 200; ++i) {
      const double y = obj.eval(rng.uniform_vec(5, -5.0, 5.0));
      CHECK(std::isfinite(y));
    }
  }
}

TEST_CASE("budget enforcement and trace accounting") {
  Objective obj = make_benchmark("sphere", 2, 1);
  BudgetedObjective bo(obj, 3);
  bo(Vec::Zero(2));
  bo(Vec::Constant(2, 1.0));
  bo(Vec::Constant(2, 2.0));
  CHECK(bo.used() == 3);
  CHECK(bo.trace().size() == 3);
  CHECK_THROWS_AS(bo(Vec::Zero(2)), BudgetExhausted);
  CHECK(bo.used() == 3);  // failed call does not consume budget
}

TEST_CASE("budget of one rejects the second call") {
  BudgetedObjective bo(make_benchmark("rosenbrock", 2, 1), 1);
  bo(Vec::Zero(2));
  CHECK_THROWS_AS(bo(Vec::Zero(2)), BudgetExhausted);
}

TEST_CASE("y_best in the trace is the running minimum") {
  BudgetedObjective bo(make_benchmark("sphere", 1, 2), 10);
  Rng rng(3);
  for (int i = 0; i < 10; ++i) bo(rng.uniform_vec(1, -5.0, 5.0));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : bo.trace()) {
    best = std::min(best, p.y);
    CHECK(p.y_best == best);
  }
  CHECK(bo.y_best() == best);
}

TEST_CASE("marginally outside points are clamped, far outside rejected") {
  BudgetedObjective bo(make_benchmark("sphere", 1, 2), 10);
  CHECK_NOTHROW(bo(Vec::Constant(1, 5.0 + 5e-10)));
  CHECK_THROWS_AS(bo(Vec::Constant(1, 5.1)), std::domain_error);
}

TEST_CASE("unknown family names are rejected") {
  CHECK_THROWS_AS(make_benchmark("nope", 2, 1), std::invalid_argument);
}

TEST_CASE("diagonal 1d construction matches f(x, x)") {
  Objective f2 = make_benchmark("rastrigin", 2, 6);
  Objective f1 = make_diagonal_1d(f2);
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const double x = rng.uniform(-5.0, 5.0);
    Vec xx(2);
    xx << x, x;
    CHECK(f1.eval(Vec::Constant(1, x)) == doctest::Approx(f2.eval(xx)));
  }
}
