#include "egl/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace egl {

namespace {

struct Vertex {
  Vec x;
  double y;
};

}  // namespace

RunRecord nelder_mead(BudgetedObjective& obj, const Vec& x0, double scale, std::uint64_t seed) {
  const Objective& o = obj.objective();
  const int n = o.dim;
  if (scale <= 0.0) scale = 0.05 * (o.hi - o.lo).maxCoeff();

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  auto clamp_box = [&](Vec v) {
    for (int i = 0; i < n; ++i) v[i] = std::clamp(v[i], o.lo[i], o.hi[i]);
    return v;
  };

  std::vector<Vertex> simplex;
  try {
    simplex.reserve(n + 1);
    simplex.push_back({x0, obj(x0)});
    for (int i = 0; i < n; ++i) {
      Vec v = x0;
      v[i] = (v[i] + scale <= o.hi[i]) ? v[i] + scale : v[i] - scale;
      simplex.push_back({v, obj(v)});
    }
    auto by_value = [](const Vertex& a, const Vertex& b) { return a.y < b.y; };
    std::stable_sort(simplex.begin(), simplex.end(), by_value);

    while (true) {
      // centroid of all but the worst
      Vec centroid = Vec::Zero(n);
      for (int i = 0; i < n; ++i) centroid += simplex[i].x;
      centroid /= static_cast<double>(n);
      const Vertex& worst = simplex[n];

      Vec xr = clamp_box(centroid + kReflect * (centroid - worst.x));
      const double yr = obj(xr);

      if (yr < simplex[0].y) {
        Vec xe = clamp_box(centroid + kExpand * (centroid - worst.x));
        const double ye = obj(xe);
        simplex[n] = ye < yr ? Vertex{xe, ye} : Vertex{xr, yr};
      } else if (yr < simplex[n - 1].y) {
        simplex[n] = {xr, yr};
      } else {
        const bool outside = yr < worst.y;
        Vec xc = outside ? clamp_box(centroid + kContract * (xr - centroid))
                         : clamp_box(centroid - kContract * (centroid - worst.x));
        const double yc = obj(xc);
        if (yc < std::min(yr, worst.y)) {
          simplex[n] = {xc, yc};
        } else {
          for (int i = 1; i <= n; ++i) {
            simplex[i].x = simplex[0].x + kShrink * (simplex[i].x - simplex[0].x);
            simplex[i].y = obj(simplex[i].x);
          }
        }
      }
      std::stable_sort(simplex.begin(), simplex.end(), by_value);
    }
  } catch (const BudgetExhausted&) {
  }
  return obj.record(seed, fnv1a("nelder_mead|" + format_double(scale)));
}

RunRecord random_search(BudgetedObjective& obj, std::uint64_t seed) {
  const Objective& o = obj.objective();
  Rng rng = Rng(seed).stream(rng_stream::kBaseline);
  try {
    while (true) {
      Vec x(o.dim);
      for (int i = 0; i < o.dim; ++i) x[i] = rng.uniform(o.lo[i], o.hi[i]);
      obj(x);
    }
  } catch (const BudgetExhausted&) {
  }
  return obj.record(seed, fnv1a("random_search"));
}

}  // namespace egl
