#include "egl/nn.hpp"

#include <algorithm>
#include <cmath>

namespace egl {

double spline_eval(const Vec& theta, const Vec& knots, double x) {
  const int k = static_cast<int>(knots.size());
  if (k < 2 || theta.size() != k) throw std::invalid_argument("need k >= 2 knots and matching theta");
  // segment [t_i, t_{i+1}] with end segments extrapolated
  int i = static_cast<int>(std::upper_bound(knots.data(), knots.data() + k, x) - knots.data()) - 1;
  i = std::clamp(i, 0, k - 2);
  const double h = knots[i + 1] - knots[i];
  const double w = (x - knots[i]) / h;
  return theta[i] * (1.0 - w) + theta[i + 1] * w;
}

Net::Net(const NetConfig& cfg, Rng& init_rng) : cfg_(cfg) {
  if (cfg_.input_dim <= 0 || cfg_.output_dim <= 0 || cfg_.width <= 0)
    throw std::invalid_argument("bad net dimensions");
  if (cfg_.spline && cfg_.spline_knots < 2) throw std::invalid_argument("need >= 2 knots");

  z_dim_ = cfg_.input_dim + (cfg_.spline ? cfg_.spline_count : 0);

  int off = 0;
  if (cfg_.spline) {
    lay_.spline = off;
    off += cfg_.input_dim * cfg_.spline_count * cfg_.spline_knots;
    knot0_ = cfg_.spline_lo;
    knot_h_ = (cfg_.spline_hi - cfg_.spline_lo) / (cfg_.spline_knots - 1);
  }
  lay_.w_in = off;
  off += cfg_.width * z_dim_;
  lay_.b_in = off;
  off += cfg_.width;
  for (int b = 0; b < cfg_.res_blocks; ++b) {
    lay_.blk.push_back(off);
    off += 2 * (cfg_.width * cfg_.width + cfg_.width);
  }
  lay_.w_out = off;
  off += cfg_.output_dim * cfg_.width;
  lay_.b_out = off;
  off += cfg_.output_dim;
  lay_.total = off;

  theta_ = Vec::Zero(lay_.total);
  grad_ = Vec::Zero(lay_.total);

  auto glorot = [&](int o, int rows, int cols) {
    const double s = std::sqrt(6.0 / (rows + cols));
    for (int i = 0; i < rows * cols; ++i) theta_[o + i] = init_rng.uniform(-s, s);
  };
  glorot(lay_.w_in, cfg_.width, z_dim_);
  for (int b = 0; b < cfg_.res_blocks; ++b) {
    const int o = lay_.blk[b];
    const int wsz = cfg_.width * cfg_.width;
    glorot(o, cfg_.width, cfg_.width);                   // W1
    glorot(o + wsz + cfg_.width, cfg_.width, cfg_.width);  // W2
  }
  glorot(lay_.w_out, cfg_.output_dim, cfg_.width);
  // biases and spline thetas stay zero
}

double Net::act(double z) const {
  switch (cfg_.activation) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::tanh: return std::tanh(z);
    default: return z;
  }
}

Mat Net::act_m(const Mat& z) const {
  switch (cfg_.activation) {
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::tanh: return z.array().tanh().matrix();
    default: return z;
  }
}

Mat Net::dact_m(const Mat& z) const {
  switch (cfg_.activation) {
    case Activation::relu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::tanh: {
      Mat t = z.array().tanh().matrix();
      return (1.0 - t.array().square()).matrix();
    }
    default:
      return Mat::Ones(z.rows(), z.cols());
  }
}

void Net::embed_forward(const Mat& X) {
  const int n = cfg_.input_dim;
  const int e = cfg_.spline_count;
  const int k = cfg_.spline_knots;
  const int B = static_cast<int>(X.cols());

  seg_.resize(n, B);
  segw_.resize(n, B);
  z_.resize(z_dim_, B);
  z_.topRows(e).setZero();
  z_.bottomRows(n) = X;

  const double* th = theta_.data() + lay_.spline;
  for (int b = 0; b < B; ++b) {
    for (int l = 0; l < n; ++l) {
      const double x = X(l, b);
      int i = static_cast<int>(std::floor((x - knot0_) / knot_h_));
      i = std::clamp(i, 0, k - 2);
      const double w = (x - (knot0_ + i * knot_h_)) / knot_h_;
      seg_(l, b) = i;
      segw_(l, b) = w;
      const double* tlj = th + l * e * k;
      for (int j = 0; j < e; ++j, tlj += k)
        z_(j, b) += tlj[i] * (1.0 - w) + tlj[i + 1] * w;
    }
  }
  z_.topRows(e) /= static_cast<double>(n);  // average pooling over coordinates
}

Mat Net::embed_backward(const Mat& dZ) {
  const int n = cfg_.input_dim;
  const int e = cfg_.spline_count;
  const int k = cfg_.spline_knots;
  const int B = static_cast<int>(dZ.cols());

  Mat dX = dZ.bottomRows(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double* th = theta_.data() + lay_.spline;
  double* gth = grad_.data() + lay_.spline;
  for (int b = 0; b < B; ++b) {
    for (int l = 0; l < n; ++l) {
      const int i = seg_(l, b);
      const double w = segw_(l, b);
      const double* tlj = th + l * e * k;
      double* glj = gth + l * e * k;
      double dx = 0.0;
      for (int j = 0; j < e; ++j, tlj += k, glj += k) {
        const double up = dZ(j, b) * inv_n;
        glj[i] += up * (1.0 - w);
        glj[i + 1] += up * w;
        dx += up * (tlj[i + 1] - tlj[i]) / knot_h_;
      }
      dX(l, b) += dx;
    }
  }
  return dX;
}

Mat Net::forward(const Mat& X) {
  if (X.rows() != cfg_.input_dim) throw std::invalid_argument("input dimension mismatch");
  x_ = X;

  if (cfg_.spline) {
    embed_forward(X);
  } else {
    z_ = X;
  }

  auto w_in = mat(theta_, lay_.w_in, cfg_.width, z_dim_);
  auto b_in = Eigen::Map<const Vec>(theta_.data() + lay_.b_in, cfg_.width);
  p_in_ = (w_in * z_).colwise() + b_in;
  a_in_ = act_m(p_in_);

  const int nb = cfg_.res_blocks;
  blk_p1_.assign(nb, Mat());
  blk_a1_.assign(nb, Mat());
  blk_s_.assign(nb, Mat());
  blk_in_.assign(nb, Mat());
  Mat h = a_in_;
  const int wsz = cfg_.width * cfg_.width;
  for (int b = 0; b < nb; ++b) {
    const int o = lay_.blk[b];
    auto w1 = mat(theta_, o, cfg_.width, cfg_.width);
    auto b1 = Eigen::Map<const Vec>(theta_.data() + o + wsz, cfg_.width);
    auto w2 = mat(theta_, o + wsz + cfg_.width, cfg_.width, cfg_.width);
    auto b2 = Eigen::Map<const Vec>(theta_.data() + o + 2 * wsz + cfg_.width, cfg_.width);
    blk_in_[b] = h;
    blk_p1_[b] = (w1 * h).colwise() + b1;
    blk_a1_[b] = act_m(blk_p1_[b]);
    blk_s_[b] = h + ((w2 * blk_a1_[b]).colwise() + b2);
    h = act_m(blk_s_[b]);
  }

  auto w_out = mat(theta_, lay_.w_out, cfg_.output_dim, cfg_.width);
  auto b_out = Eigen::Map<const Vec>(theta_.data() + lay_.b_out, cfg_.output_dim);
  last_h_ = h;
  return (w_out * h).colwise() + b_out;
}

Vec Net::forward1(const Vec& x) { return forward(Mat(x)); }

Mat Net::backward(const Mat& dY, bool want_input_grad) {
  const int wsz = cfg_.width * cfg_.width;

  auto w_out = mat(theta_, lay_.w_out, cfg_.output_dim, cfg_.width);
  mat(grad_, lay_.w_out, cfg_.output_dim, cfg_.width) += dY * last_h_.transpose();
  Eigen::Map<Vec>(grad_.data() + lay_.b_out, cfg_.output_dim) += dY.rowwise().sum();
  Mat dh = w_out.transpose() * dY;

  for (int b = cfg_.res_blocks - 1; b >= 0; --b) {
    const int o = lay_.blk[b];
    auto w1 = mat(theta_, o, cfg_.width, cfg_.width);
    auto w2 = mat(theta_, o + wsz + cfg_.width, cfg_.width, cfg_.width);
    Mat ds = dh.cwiseProduct(dact_m(blk_s_[b]));
    mat(grad_, o + wsz + cfg_.width, cfg_.width, cfg_.width) += ds * blk_a1_[b].transpose();
    Eigen::Map<Vec>(grad_.data() + o + 2 * wsz + cfg_.width, cfg_.width) += ds.rowwise().sum();
    Mat da1 = w2.transpose() * ds;
    Mat dp1 = da1.cwiseProduct(dact_m(blk_p1_[b]));
    mat(grad_, o, cfg_.width, cfg_.width) += dp1 * blk_in_[b].transpose();
    Eigen::Map<Vec>(grad_.data() + o + wsz, cfg_.width) += dp1.rowwise().sum();
    dh = ds + w1.transpose() * dp1;  // skip connection + block path
  }

  auto w_in = mat(theta_, lay_.w_in, cfg_.width, z_dim_);
  Mat dp_in = dh.cwiseProduct(dact_m(p_in_));
  mat(grad_, lay_.w_in, cfg_.width, z_dim_) += dp_in * z_.transpose();
  Eigen::Map<Vec>(grad_.data() + lay_.b_in, cfg_.width) += dp_in.rowwise().sum();

  if (!want_input_grad && !cfg_.spline) return Mat();
  Mat dz = w_in.transpose() * dp_in;
  if (cfg_.spline) {
    Mat dx = embed_backward(dz);
    return want_input_grad ? dx : Mat();
  }
  return want_input_grad ? dz : Mat();
}

Vec Net::input_gradient(const Vec& x) {
  if (cfg_.output_dim != 1) throw std::logic_error("input_gradient needs a scalar output");
  forward(Mat(x));
  const Vec saved = grad_;
  Mat dx = backward(Mat::Ones(1, 1), true);
  grad_ = saved;  // input gradients must not disturb accumulated trainer state
  return dx.col(0);
}

Vec Net::spline_knot_grid() const {
  Vec knots(cfg_.spline_knots);
  for (int i = 0; i < cfg_.spline_knots; ++i) knots[i] = knot0_ + i * knot_h_;
  return knots;
}

void AdamState::step(Vec& params, const Vec& grads) {
  if (m.size() != params.size()) {
    m = Vec::Zero(params.size());
    v = Vec::Zero(params.size());
  }
  ++step_count;
  m = beta1 * m + (1.0 - beta1) * grads;
  v = beta2 * v + (1.0 - beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(beta1, step_count);
  const double bc2 = 1.0 - std::pow(beta2, step_count);
  params -= (learning_rate * (m / bc1).array() / ((v / bc2).array().sqrt() + eps_hat)).matrix();
}

}  // namespace egl
