#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "egl/gradnet.hpp"
#include "egl/mappings.hpp"

using namespace egl;

TEST_CASE("squash matches its piecewise definition") {
  CHECK(squash(0.5) == 0.5);
  CHECK(squash(std::exp(1.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(squash(-std::exp(1.0)) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(squash(-1.0) == -1.0);
  CHECK(squash(1.0) == 1.0);

  // exact piecewise agreement against an independently coded reference
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform(-50.0, 50.0);
    double expected;
    if (x < -1.0)
      expected = -std::log(-x) - 1.0;
    else if (x < 1.0)
      expected = x;
    else
      expected = std::log(x) + 1.0;
    CHECK(squash(x) == expected);
  }
}

TEST_CASE("squash is strictly increasing and continuous at the seams") {
  Rng rng(2);
  double prev_x = -60.0, prev_s = squash(-60.0);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(rng.uniform(-55.0, 55.0));
  std::sort(xs.begin(), xs.end());
  for (double x : xs) {
    const double s = squash(x);
    CHECK(s > prev_s);
    prev_s = s;
    prev_x = x;
  }
  (void)prev_x;
  CHECK(std::abs(squash(1.0 - 1e-12) - squash(1.0 + 1e-12)) <= 1e-9);
  CHECK(std::abs(squash(-1.0 - 1e-12) - squash(-1.0 + 1e-12)) <= 1e-9);
}

TEST_CASE("squash inverse and derivative are consistent") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-30.0, 30.0);
    CHECK(squash_inverse(squash(x)) == doctest::Approx(x).epsilon(1e-12));
    if (std::abs(std::abs(x) - 1.0) < 1e-3) continue;  // FD straddles a seam
    const double h = 1e-6;
    const double fd = (squash(x + h) - squash(x - h)) / (2.0 * h);
    CHECK(squash_derivative(x) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("input map sends the region center to zero") {
  TrustRegion tr = TrustRegion::box(Vec::Constant(2, -5.0), Vec::Constant(2, 5.0));
  InputMap h(tr);
  CHECK(h.forward(Vec::Zero(2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("input map matches the arctanh formula") {
  TrustRegion tr = TrustRegion::box(Vec::Constant(1, 0.0), Vec::Constant(1, 2.0));
  InputMap h(tr);
  // x = 1.5 maps linearly to 0.5, then atanh
  CHECK(h.forward(Vec::Constant(1, 1.5))[0] == doctest::Approx(0.5493061443340548).epsilon(1e-12));
  // the upper bound lands on the clamp: atanh(1 - 1e-6), via the log identity
  const double lim = 1.0 - 1e-6;
  const double expect = 0.5 * std::log((1.0 + lim) / (1.0 - lim));
  CHECK(h.forward(Vec::Constant(1, 2.0))[0] == doctest::Approx(expect).epsilon(1e-10));
  CHECK(std::isfinite(h.forward(Vec::Constant(1, 2.0))[0]));
}

TEST_CASE("input map round trips interior points") {
  Rng rng(4);
  TrustRegion tr = TrustRegion::box(Vec::Constant(3, -2.0), Vec::Constant(3, 4.0));
  InputMap h(tr);
  for (int i = 0; i < 500; ++i) {
    const Vec x = rng.uniform_vec(3, -1.99, 3.99);
    CHECK((h.inverse(h.forward(x)) - x).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
  // zero maps back to the center
  CHECK((h.inverse(Vec::Zero(3)) - tr.center()).norm() <= 1e-12);
  // saturated coordinates land on the bounds
  CHECK(h.inverse(Vec::Constant(3, 50.0))[0] == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(h.inverse(Vec::Constant(3, -50.0))[0] == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("input map is monotone per dimension") {
  TrustRegion tr = TrustRegion::box(Vec::Constant(1, -5.0), Vec::Constant(1, 5.0));
  InputMap h(tr);
  double prev = -1e300;
  for (double x = -4.9; x <= 4.9; x += 0.05) {
    const double v = h.forward(Vec::Constant(1, x))[0];
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("output map fits exact quantiles on the first call") {
  std::vector<double> ys(101);
  for (int i = 0; i <= 100; ++i) ys[i] = i;
  OutputMap om(0.1);
  om.fit(ys);
  CHECK(om.q_low() == doctest::Approx(10.0));
  CHECK(om.q_high() == doctest::Approx(90.0));
}

TEST_CASE("second fit blends with the moving-average rate") {
  OutputMap om(0.1);
  std::vector<double> first(101), second(101);
  for (int i = 0; i <= 100; ++i) {
    first[i] = i;          // quantiles 10, 90
    second[i] = i + 10.0;  // quantiles 20, 100
  }
  om.fit(first);
  om.fit(second);
  CHECK(om.q_low() == doctest::Approx(11.0));
  CHECK(om.q_high() == doctest::Approx(91.0));
}

TEST_CASE("all-equal samples fall back to a unit span") {
  OutputMap om(0.1);
  std::vector<double> ys(32, 7.5);
  om.fit(ys);
  CHECK(om.q_low() == doctest::Approx(7.0));
  CHECK(om.q_high() == doctest::Approx(8.0));
  CHECK(om.forward(7.5) == doctest::Approx(0.0));
}

TEST_CASE("output forward hits its landmark values") {
  OutputMap om(0.1);
  std::vector<double> ys;
  for (int i = 0; i <= 100; ++i) ys.push_back(i);
  om.fit(ys);  // q = (10, 90)
  CHECK(om.forward(om.q_low()) == doctest::Approx(-1.0));
  CHECK(om.forward(0.5 * (om.q_low() + om.q_high())) == doctest::Approx(0.0));
  // y at linear-map value e squashes to 2
  const double y = om.q_high() + (om.q_high() - om.q_low()) * (std::exp(1.0) - 1.0) / 2.0;
  CHECK(om.forward(y) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("output map is strictly increasing and invertible") {
  OutputMap om(0.1);
  std::vector<double> ys = {3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.0, 3.5, 8.0, 7.0};
  om.fit(ys);
  Rng rng(5);
  const double span = om.q_high() - om.q_low();
  double prev = -1e300;
  std::vector<double> points;
  for (int i = 0; i < 2000; ++i)
    points.push_back(rng.uniform(om.q_low() - 10.0 * span, om.q_high() + 10.0 * span));
  std::sort(points.begin(), points.end());
  for (double y : points) {
    const double s = om.forward(y);
    CHECK(s > prev);
    prev = s;
    CHECK(std::abs(om.inverse(s) - y) <= 1e-9 * std::max(1.0, std::abs(y)));
  }
}

TEST_CASE("gradient recovery applies the scalar chain rule") {
  // h(x) = 2x comes from the box [-0.5, 0.5]; r(y) = y/4 from quantiles
  // (-4, 4); both linear branches
  TrustRegion tr = TrustRegion::box(Vec::Constant(1, -0.5), Vec::Constant(1, 0.5));
  InputMap h(tr);
  // arctanh'(0) = 1 so dh/dx at the center is exactly a = 2
  OutputMap om(0.1);
  std::vector<double> ys;
  for (int i = 0; i <= 100; ++i) ys.push_back(-5.0 + 10.0 * i / 100.0);  // q: (-4, 4)
  om.fit(ys);
  REQUIRE(om.q_low() == doctest::Approx(-4.0));
  REQUIRE(om.q_high() == doctest::Approx(4.0));

  const Vec g_tilde = Vec::Constant(1, 1.0);
  const Vec g = recover_gradient(g_tilde, h, om, Vec::Zero(1), 0.0);
  CHECK(g[0] == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("identity-like maps leave the gradient unchanged") {
  // region [-1, 1] gives a = 1; output quantiles (-1, 1) give dr/dy = 1
  TrustRegion tr = TrustRegion::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  InputMap h(tr);
  OutputMap om(0.1);
  std::vector<double> ys;
  for (int i = 0; i <= 100; ++i) ys.push_back(-1.25 + 2.5 * i / 100.0);
  om.fit(ys);
  Vec g_tilde(2);
  g_tilde << 0.3, -0.7;
  const Vec g = recover_gradient(g_tilde, h, om, Vec::Zero(2), 0.0);
  CHECK((g - g_tilde).norm() <= 1e-12);
}

TEST_CASE("full pipeline recovers an affine slope through both maps") {
  Rng rng(6);
  const int n = 2;
  const Vec c = rng.uniform_vec(n, -1.5, 1.5);
  auto f = [&](const Vec& x) { return c.dot(x) + 0.25; };

  TrustRegion tr = TrustRegion::box(Vec::Constant(n, -1.0), Vec::Constant(n, 3.0));
  InputMap h(tr);
  const Vec x0 = tr.center();

  // sample near the center in mapped space, fit the output map on raw values
  std::vector<Vec> xts, xs;
  std::vector<double> ys;
  const Vec xt0 = h.forward(x0);
  for (int i = 0; i < 16; ++i) {
    const Vec xt = xt0 + rng.ball_vec(n, 0.02);
    const Vec x = h.inverse(xt);
    xts.push_back(xt);
    xs.push_back(x);
    ys.push_back(f(x));
  }
  OutputMap om(0.1);
  om.fit(ys);

  std::vector<double> yts;
  for (double y : ys) yts.push_back(om.forward(y));
  const LsSolution sol = ls_mean_gradient(xts, yts);
  const Vec g = recover_gradient(sol.g_mse, h, om, x0, f(x0));
  CHECK((g - c).norm() <= 1e-8 * std::max(1.0, c.norm()));
}

TEST_CASE("trust region shrink scales each side by exactly gamma") {
  const Vec lo = Vec::Constant(2, -5.0);
  const Vec hi = Vec::Constant(2, 5.0);
  TrustRegion tr = TrustRegion::box(lo, hi);
  TrustRegion s = shrink_trust_region(tr, Vec::Zero(2), 0.9, lo, hi);
  CHECK(s.lo[0] == doctest::Approx(-4.5));
  CHECK(s.hi[0] == doctest::Approx(4.5));
  CHECK(s.generation == 1);
}

TEST_CASE("shrink near the boundary shifts inward, keeping the width") {
  const Vec lo = Vec::Constant(1, -5.0);
  const Vec hi = Vec::Constant(1, 5.0);
  TrustRegion tr = TrustRegion::box(lo, hi);
  TrustRegion s = shrink_trust_region(tr, Vec::Constant(1, 4.9), 0.9, lo, hi);
  CHECK(s.width()[0] == doctest::Approx(9.0));
  CHECK(s.lo[0] >= -5.0 - 1e-12);
  CHECK(s.hi[0] <= 5.0 + 1e-12);
}

TEST_CASE("gamma of one only recenters") {
  const Vec lo = Vec::Constant(2, -5.0);
  const Vec hi = Vec::Constant(2, 5.0);
  TrustRegion tr = TrustRegion::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  TrustRegion s = shrink_trust_region(tr, Vec::Constant(2, 2.0), 1.0, lo, hi);
  CHECK(s.width()[0] == doctest::Approx(2.0));
  CHECK(s.center()[0] == doctest::Approx(2.0));
}

TEST_CASE("repeated shrinks stay inside the global box") {
  Rng rng(7);
  const Vec lo = Vec::Constant(3, -5.0);
  const Vec hi = Vec::Constant(3, 5.0);
  TrustRegion tr = TrustRegion::box(lo, hi);
  for (int i = 0; i < 60; ++i) {
    const Vec target = rng.uniform_vec(3, -5.0, 5.0);
    TrustRegion next = shrink_trust_region(tr, target, 0.9, lo, hi);
    for (int d = 0; d < 3; ++d) {
      CHECK(next.lo[d] >= lo[d] - 1e-12);
      CHECK(next.hi[d] <= hi[d] + 1e-12);
      CHECK(next.width()[d] == doctest::Approx(0.9 * tr.width()[d]));
    }
    tr = next;
  }
}
