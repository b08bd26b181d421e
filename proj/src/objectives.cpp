#include "egl/objectives.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace egl {

namespace {

double sphere(const Vec& z) { return z.squaredNorm(); }

double ellipsoid(const Vec& z) {
  const int n = static_cast<int>(z.size());
  if (n == 1) return z[0] * z[0];
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::pow(10.0, 6.0 * i / (n - 1)) * z[i] * z[i];
  return s;
}

double rastrigin(const Vec& z) {
  double s = 10.0 * static_cast<double>(z.size());
  for (int i = 0; i < z.size(); ++i) s += z[i] * z[i] - 10.0 * std::cos(2.0 * M_PI * z[i]);
  return s;
}

// Shifted so the minimum sits at z = 0 (substitute w = z + 1).
double rosenbrock(const Vec& z) {
  double s = 0.0;
  for (int i = 0; i + 1 < z.size(); ++i) {
    const double wi = z[i] + 1.0;
    const double wn = z[i + 1] + 1.0;
    const double a = wn - wi * wi;
    const double b = 1.0 - wi;
    s += 100.0 * a * a + b * b;
  }
  return s;
}

// Each coordinate snapped to the nearest 0.5 grid; plateaus with
// discontinuous jumps, minimum cell around the origin.
double step_ellipsoid(const Vec& z) {
  const int n = static_cast<int>(z.size());
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double q = std::round(z[i] * 2.0) * 0.5;
    const double w = (n == 1) ? 1.0 : std::pow(10.0, 6.0 * i / (n - 1));
    s += w * q * q;
  }
  return s;
}

double sharp_ridge(const Vec& z) {
  double tail = 0.0;
  for (int i = 1; i < z.size(); ++i) tail += z[i] * z[i];
  return z[0] * z[0] + 100.0 * std::sqrt(tail);
}

double schaffer_f7(const Vec& z) {
  const int n = static_cast<int>(z.size());
  double acc = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double s = std::sqrt(z[i] * z[i] + z[i + 1] * z[i + 1]);
    const double si = std::sin(50.0 * std::pow(s, 0.2));
    acc += std::sqrt(s) * (1.0 + si * si);
  }
  acc /= static_cast<double>(n - 1);
  return acc * acc;
}

double griewank_rosenbrock(const Vec& z) {
  const int n = static_cast<int>(z.size());
  double acc = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double wi = z[i] + 1.0;
    const double wn = z[i + 1] + 1.0;
    const double a = wi * wi - wn;
    const double b = wi - 1.0;
    const double s = 100.0 * a * a + b * b;
    acc += s / 4000.0 - std::cos(s);
  }
  return 10.0 / (n - 1) * acc + 10.0;
}

struct Family {
  const char* name;
  bool rotated;
  int min_dim;
  double (*base)(const Vec&);
};

const Family kFamilies[] = {
    {"sphere", false, 1, sphere},
    {"ellipsoid", false, 1, ellipsoid},
    {"rastrigin", false, 1, rastrigin},
    {"rosenbrock", true, 2, rosenbrock},
    {"step_ellipsoid", true, 1, step_ellipsoid},
    {"sharp_ridge", true, 2, sharp_ridge},
    {"schaffer_f7", true, 2, schaffer_f7},
    {"griewank_rosenbrock", true, 2, griewank_rosenbrock},
};

const Family& find_family(const std::string& name) {
  for (const auto& f : kFamilies)
    if (name == f.name) return f;
  throw std::invalid_argument("unknown benchmark: " + name);
}

// Haar-ish random rotation: QR of a Gaussian matrix with the sign convention
// fixed so the result is deterministic.
Mat random_rotation(int n, Rng& rng) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

}  // namespace

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& f : kFamilies) v.emplace_back(f.name);
    return v;
  }();
  return names;
}

std::function<double(const Vec&)> benchmark_base(const std::string& name, int dim) {
  const Family& fam = find_family(name);
  if (dim < fam.min_dim)
    throw std::invalid_argument(std::string(fam.name) + " requires dim >= " +
                                std::to_string(fam.min_dim));
  return fam.base;
}

Objective make_benchmark(const std::string& name, int dim, std::uint64_t instance_seed) {
  const Family& fam = find_family(name);
  if (dim < fam.min_dim)
    throw std::invalid_argument(std::string(fam.name) + " requires dim >= " +
                                std::to_string(fam.min_dim));

  Rng rng(instance_seed);
  Rng shift_rng = rng.stream(0);
  Rng rot_rng = rng.stream(1);

  Objective obj;
  obj.name = name;
  obj.dim = dim;
  obj.lo = Vec::Constant(dim, -5.0);
  obj.hi = Vec::Constant(dim, 5.0);
  obj.shift = shift_rng.uniform_vec(dim, -4.0, 4.0);
  obj.rotation = fam.rotated ? random_rotation(dim, rot_rng) : Mat::Identity(dim, dim);
  obj.x_star = obj.shift;
  obj.y_star = 0.0;

  auto base = fam.base;
  const Vec shift = obj.shift;
  if (fam.rotated) {
    const Mat rot = obj.rotation;
    obj.eval = [base, shift, rot](const Vec& x) { return base(rot * (x - shift)); };
  } else {
    obj.eval = [base, shift](const Vec& x) { return base(x - shift); };
  }
  return obj;
}

Objective make_diagonal_1d(const Objective& f2d) {
  if (f2d.dim != 2) throw std::invalid_argument("make_diagonal_1d requires a 2D objective");
  Objective obj;
  obj.name = f2d.name + "_1d";
  obj.dim = 1;
  obj.lo = f2d.lo.head(1);
  obj.hi = f2d.hi.head(1);
  auto inner = f2d.eval;
  obj.eval = [inner](const Vec& x) {
    Vec xx(2);
    xx << x[0], x[0];
    return inner(xx);
  };
  obj.shift = Vec::Zero(1);
  obj.rotation = Mat::Identity(1, 1);
  return obj;
}

BudgetedObjective::BudgetedObjective(Objective obj, std::int64_t budget)
    : obj_(std::move(obj)), budget_(budget) {
  if (budget_ <= 0) throw std::invalid_argument("budget must be positive");
  trace_.reserve(static_cast<std::size_t>(std::min<std::int64_t>(budget_, 1 << 20)));
}

double BudgetedObjective::operator()(const Vec& x) {
  if (used_ >= budget_) throw BudgetExhausted{};
  if (x.size() != obj_.dim) throw std::invalid_argument("dimension mismatch");
  Vec xc = x;
  for (int i = 0; i < xc.size(); ++i) {
    if (xc[i] < obj_.lo[i]) {
      if (xc[i] < obj_.lo[i] - 1e-9) throw std::domain_error("point outside domain");
      xc[i] = obj_.lo[i];
    } else if (xc[i] > obj_.hi[i]) {
      if (xc[i] > obj_.hi[i] + 1e-9) throw std::domain_error("point outside domain");
      xc[i] = obj_.hi[i];
    }
  }
  const double y = obj_.eval(xc);
  ++used_;
  if (y < y_best_) {
    y_best_ = y;
    x_best_ = xc;
  }
  trace_.push_back({used_, y, y_best_});
  return y;
}

double BudgetedObjective::y0() const {
  if (trace_.empty()) throw std::logic_error("no evaluations yet");
  return trace_.front().y;
}

RunRecord BudgetedObjective::record(std::uint64_t seed, std::uint64_t config_hash) const {
  RunRecord r;
  r.trace = trace_;
  r.x_best = x_best_;
  r.y_best = y_best_;
  r.evaluations_used = used_;
  r.seed = seed;
  r.config_hash = config_hash;
  return r;
}

}  // namespace egl
