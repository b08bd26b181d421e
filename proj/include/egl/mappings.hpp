#pragma once

#include <span>

#include "egl/core.hpp"

namespace egl {

// Identity on [-1, 1), logarithmic compression of outliers beyond. Strictly
// increasing and continuous.
double squash(double x);
double squash_inverse(double s);
double squash_derivative(double x);

// Rectangular sub-domain the optimizer currently searches.
struct TrustRegion {
  Vec lo, hi;
  int generation = 0;

  static TrustRegion box(const Vec& lo, const Vec& hi) { return {lo, hi, 0}; }
  Vec center() const { return 0.5 * (lo + hi); }
  Vec width() const { return hi - lo; }
};

// Each side is scaled by exactly gamma_alpha and recentered on x_best, then
// shifted inward where it would leave the global box.
TrustRegion shrink_trust_region(const TrustRegion& tr, const Vec& x_best, double gamma_alpha,
                                const Vec& global_lo, const Vec& global_hi);

// Per-dimension bijection region -> R^n: a linear map onto [-1, 1] followed
// by arctanh. Arguments are clamped to +/-(1 - clamp_delta) before arctanh so
// boundary points stay finite.
class InputMap {
 public:
  explicit InputMap(TrustRegion region, double clamp_delta = 1e-6);

  Vec forward(const Vec& x, long* clamp_events = nullptr) const;
  Vec inverse(const Vec& xt) const;
  // d x_tilde / d x per dimension (derivative taken at the clamped argument).
  Vec derivative(const Vec& x) const;

  const TrustRegion& region() const { return region_; }
  double clamp_delta() const { return clamp_delta_; }
  // Linear coefficients: u = a*x + b maps [lo, hi] onto [-1, 1].
  const Vec& a() const { return a_; }
  const Vec& b() const { return b_; }

 private:
  TrustRegion region_;
  Vec a_, b_;
  double clamp_delta_;
};

// Robust scaling of objective values: running 0.1/0.9 quantiles define a
// linear map onto [-1, 1], composed with squash. Refit blends new sample
// quantiles into the running ones with rate om_lr.
class OutputMap {
 public:
  explicit OutputMap(double om_lr = 0.1) : om_lr_(om_lr) {}

  void fit(std::span<const double> recent_y);
  bool fitted() const { return fitted_; }
  double q_low() const { return q_low_; }
  double q_high() const { return q_high_; }

  double forward(double y) const;
  double inverse(double yt) const;
  double derivative(double y) const;

 private:
  double om_lr_;
  double q_low_ = -1.0, q_high_ = 1.0;
  bool fitted_ = false;
};

// Linear-interpolated order statistic (the common type-7 convention).
double sample_quantile(std::span<const double> values, double q);

// Maps a mean-gradient learned in (input-mapped, output-mapped) coordinates
// back to raw coordinates: g_i = (dr/dy)^-1 * dh_i/dx_i * g~_i, evaluated at
// raw location x and raw objective level y_ref.
Vec recover_gradient(const Vec& g_tilde, const InputMap& h, const OutputMap& r, const Vec& x,
                     double y_ref);

}  // namespace egl
