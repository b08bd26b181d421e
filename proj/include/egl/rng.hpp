#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace egl {

// Deterministic splittable RNG (SplitMix64 core). All sampling goes through
// this class instead of <random> distributions so that streams are identical
// across platforms and standard-library versions. Substreams are derived from
// the root seed, never from the current state, so adding a consumer does not
// perturb existing streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : root_(seed), state_(seed) {}

  // Independent substream; index is a fixed per-consumer constant.
  Rng stream(std::uint64_t index) const {
    return Rng(mix(root_ ^ (0x9E3779B97F4A7C15ull * (index + 1))));
  }

  std::uint64_t seed() const { return root_; }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller (pair cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd uniform_vec(int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  Eigen::VectorXd normal_vec(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  // Uniform direction on the unit sphere.
  Eigen::VectorXd unit_vec(int n) {
    Eigen::VectorXd v = normal_vec(n);
    double nrm = v.norm();
    while (nrm < 1e-300) {
      v = normal_vec(n);
      nrm = v.norm();
    }
    return v / nrm;
  }

  // Uniform in the L2 ball of given radius.
  Eigen::VectorXd ball_vec(int n, double radius) {
    const double r = radius * std::pow(uniform(), 1.0 / n);
    return r * unit_vec(n);
  }

 private:
  explicit Rng(std::uint64_t seed, int) : root_(seed), state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t root_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Fixed stream indices for the standard consumers.
namespace rng_stream {
inline constexpr std::uint64_t kExplore = 1;
inline constexpr std::uint64_t kMinibatch = 2;
inline constexpr std::uint64_t kWeightInit = 3;
inline constexpr std::uint64_t kBaseline = 4;
inline constexpr std::uint64_t kPerturbation = 5;
}  // namespace rng_stream

}  // namespace egl
