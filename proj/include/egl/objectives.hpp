#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "egl/core.hpp"

namespace egl {

// Thrown when the evaluation budget is spent. Optimizers treat it as the
// normal stop signal, not an error.
struct BudgetExhausted {};

// A benchmark function with a known box domain and, where analytic, its
// minimizer. eval is pure: same x always gives the same y.
struct Objective {
  std::string name;
  int dim = 0;
  Vec lo, hi;  // global box
  std::optional<Vec> x_star;
  std::optional<double> y_star;
  std::function<double(const Vec&)> eval;

  // Instance transform, exposed for tests and diagnostics: the function is
  // base(R * (x - shift)) with R = I for separable families.
  Vec shift;
  Mat rotation;
};

const std::vector<std::string>& benchmark_names();

// name in {sphere, ellipsoid, rastrigin, rosenbrock, step_ellipsoid,
// sharp_ridge, schaffer_f7, griewank_rosenbrock}. instance_seed drives the
// random shift (all families) and rotation (non-separable families). Bounds
// are [-5, 5]^n; every instance has minimum 0 at its shift.
Objective make_benchmark(const std::string& name, int dim, std::uint64_t instance_seed);

// The family's base function, minimum 0 at the origin, no shift/rotation.
std::function<double(const Vec&)> benchmark_base(const std::string& name, int dim);

// f1(x) = f2(x, x) on the same per-dimension bounds.
Objective make_diagonal_1d(const Objective& f2d);

// Counts every evaluation against a hard budget and keeps the full trace.
class BudgetedObjective {
 public:
  BudgetedObjective(Objective obj, std::int64_t budget);

  // Throws BudgetExhausted once the budget is spent. Points within 1e-9 per
  // dimension outside the box are clamped; farther outside is an error.
  double operator()(const Vec& x);

  const Objective& objective() const { return obj_; }
  std::int64_t budget() const { return budget_; }
  std::int64_t used() const { return used_; }
  std::int64_t remaining() const { return budget_ - used_; }

  const std::vector<TracePoint>& trace() const { return trace_; }
  double y_best() const { return y_best_; }
  const Vec& x_best() const { return x_best_; }
  double y0() const;  // first evaluation's value

  RunRecord record(std::uint64_t seed, std::uint64_t config_hash) const;

 private:
  Objective obj_;
  std::int64_t budget_;
  std::int64_t used_ = 0;
  std::vector<TracePoint> trace_;
  double y_best_ = std::numeric_limits<double>::infinity();
  Vec x_best_;
};

}  // namespace egl
