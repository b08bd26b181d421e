#include "egl/mappings.hpp"

#include <algorithm>
#include <cmath>

namespace egl {

double squash(double x) {
  if (x < -1.0) return -std::log(-x) - 1.0;
  if (x < 1.0) return x;
  return std::log(x) + 1.0;
}

double squash_inverse(double s) {
  if (s < -1.0) return -std::exp(-s - 1.0);
  if (s < 1.0) return s;
  return std::exp(s - 1.0);
}

double squash_derivative(double x) {
  if (x < -1.0) return -1.0 / x;
  if (x < 1.0) return 1.0;
  return 1.0 / x;
}

TrustRegion shrink_trust_region(const TrustRegion& tr, const Vec& x_best, double gamma_alpha,
                                const Vec& global_lo, const Vec& global_hi) {
  if (gamma_alpha <= 0.0 || gamma_alpha > 1.0)
    throw std::invalid_argument("gamma_alpha must be in (0, 1]");
  const int n = static_cast<int>(tr.lo.size());
  TrustRegion out;
  out.lo.resize(n);
  out.hi.resize(n);
  out.generation = tr.generation + 1;
  for (int i = 0; i < n; ++i) {
    double half = 0.5 * gamma_alpha * (tr.hi[i] - tr.lo[i]);
    const double gw = global_hi[i] - global_lo[i];
    if (2.0 * half > gw) half = 0.5 * gw;  // cannot exceed the global box
    double c = x_best[i];
    if (c - half < global_lo[i]) c = global_lo[i] + half;
    if (c + half > global_hi[i]) c = global_hi[i] - half;
    out.lo[i] = c - half;
    out.hi[i] = c + half;
  }
  return out;
}

InputMap::InputMap(TrustRegion region, double clamp_delta)
    : region_(std::move(region)), clamp_delta_(clamp_delta) {
  const int n = static_cast<int>(region_.lo.size());
  a_.resize(n);
  b_.resize(n);
  for (int i = 0; i < n; ++i) {
    const double w = region_.hi[i] - region_.lo[i];
    if (!(w > 0.0)) throw std::invalid_argument("degenerate trust region");
    a_[i] = 2.0 / w;
    b_[i] = -(region_.hi[i] + region_.lo[i]) / w;
  }
}

Vec InputMap::forward(const Vec& x, long* clamp_events) const {
  const double lim = 1.0 - clamp_delta_;
  Vec out(x.size());
  for (int i = 0; i < x.size(); ++i) {
    double u = a_[i] * x[i] + b_[i];
    if (u > lim) {
      u = lim;
      if (clamp_events) ++*clamp_events;
    } else if (u < -lim) {
      u = -lim;
      if (clamp_events) ++*clamp_events;
    }
    out[i] = std::atanh(u);
  }
  return out;
}

Vec InputMap::inverse(const Vec& xt) const {
  Vec out(xt.size());
  for (int i = 0; i < xt.size(); ++i) {
    const double x = (std::tanh(xt[i]) - b_[i]) / a_[i];
    out[i] = std::clamp(x, region_.lo[i], region_.hi[i]);
  }
  return out;
}

Vec InputMap::derivative(const Vec& x) const {
  const double lim = 1.0 - clamp_delta_;
  Vec out(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double u = std::clamp(a_[i] * x[i] + b_[i], -lim, lim);
    out[i] = a_[i] / (1.0 - u * u);
  }
  return out;
}

double sample_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  const double w = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - w) + v[lo + 1] * w;
}

void OutputMap::fit(std::span<const double> recent_y) {
  double ql = sample_quantile(recent_y, 0.1);
  double qh = sample_quantile(recent_y, 0.9);
  if (qh - ql < 1e-12) {  // all-equal fallback keeps the map invertible
    const double c = 0.5 * (ql + qh);
    ql = c - 0.5;
    qh = c + 0.5;
  }
  if (!fitted_) {
    q_low_ = ql;
    q_high_ = qh;
    fitted_ = true;
  } else {
    q_low_ = (1.0 - om_lr_) * q_low_ + om_lr_ * ql;
    q_high_ = (1.0 - om_lr_) * q_high_ + om_lr_ * qh;
  }
}

double OutputMap::forward(double y) const {
  if (!fitted_) throw std::logic_error("output map not fitted");
  return squash(2.0 * (y - q_low_) / (q_high_ - q_low_) - 1.0);
}

double OutputMap::inverse(double yt) const {
  if (!fitted_) throw std::logic_error("output map not fitted");
  const double u = squash_inverse(yt);
  return 0.5 * (u + 1.0) * (q_high_ - q_low_) + q_low_;
}

double OutputMap::derivative(double y) const {
  if (!fitted_) throw std::logic_error("output map not fitted");
  const double scale = 2.0 / (q_high_ - q_low_);
  return scale * squash_derivative(scale * (y - q_low_) - 1.0);
}

Vec recover_gradient(const Vec& g_tilde, const InputMap& h, const OutputMap& r, const Vec& x,
                     double y_ref) {
  const double dr = r.derivative(y_ref);
  return h.derivative(x).cwiseProduct(g_tilde) / dr;
}

}  // namespace egl
