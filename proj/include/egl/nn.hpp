#pragma once

#include <vector>

#include "egl/core.hpp"
#include "egl/rng.hpp"

namespace egl {

enum class Activation { relu, tanh, identity };

// Piecewise-linear interpolation over strictly increasing knots; outside the
// knot range the end segment is extrapolated linearly. At a knot t_i the
// value is exactly theta_i.
double spline_eval(const Vec& theta, const Vec& knots, double x);

struct NetConfig {
  int input_dim = 0;
  int output_dim = 0;
  int width = 64;
  int res_blocks = 2;
  Activation activation = Activation::tanh;
  // Spline embedding front end: e learnable splines per input coordinate on
  // k equally spaced knots over [spline_lo, spline_hi], average-pooled over
  // the coordinate axis and concatenated with the raw input.
  bool spline = true;
  int spline_count = 8;   // e
  int spline_knots = 21;  // k
  double spline_lo = -1.0;
  double spline_hi = 1.0;
};

// Small trainable network: optional spline embedding, an input layer, a stack
// of two-layer residual blocks, and a biased linear output layer. Parameters
// live in one flat vector; forward caches activations for backward. A net is
// mutated by one trainer at a time.
class Net {
 public:
  Net(const NetConfig& cfg, Rng& init_rng);

  const NetConfig& config() const { return cfg_; }
  int input_dim() const { return cfg_.input_dim; }
  int output_dim() const { return cfg_.output_dim; }

  // X is input_dim x B; returns output_dim x B.
  Mat forward(const Mat& X);
  Vec forward1(const Vec& x);

  void zero_grad() { grad_.setZero(); }

  // Backpropagates dL/dY from the last forward call, accumulating parameter
  // gradients; returns dL/dX when requested (empty otherwise).
  Mat backward(const Mat& dY, bool want_input_grad = false);

  // Gradient of the scalar output with respect to the input.
  Vec input_gradient(const Vec& x);

  Vec& params() { return theta_; }
  const Vec& params() const { return theta_; }
  Vec& grads() { return grad_; }
  const Vec& grads() const { return grad_; }

  // Hidden activations feeding the output layer, cached by the last forward.
  const Mat& last_hidden() const { return last_h_; }

  Vec spline_knot_grid() const;

 private:
  struct Layout {
    int spline = 0;  // offset of spline parameters (n*e*k)
    int w_in = 0, b_in = 0;
    std::vector<int> blk;  // per block: offset of [W1,b1,W2,b2] start
    int w_out = 0, b_out = 0;
    int total = 0;
  };

  double act(double z) const;
  Mat act_m(const Mat& z) const;
  Mat dact_m(const Mat& z) const;

  Eigen::Map<Mat> mat(Vec& v, int off, int r, int c) const {
    return Eigen::Map<Mat>(v.data() + off, r, c);
  }
  Eigen::Map<const Mat> mat(const Vec& v, int off, int r, int c) const {
    return Eigen::Map<const Mat>(v.data() + off, r, c);
  }

  void embed_forward(const Mat& X);
  Mat embed_backward(const Mat& dZ);  // returns dX

  NetConfig cfg_;
  Layout lay_;
  int z_dim_ = 0;  // dense-stack input width
  Vec theta_, grad_;
  double knot0_ = 0.0, knot_h_ = 0.0;

  // forward caches
  Mat x_, z_;
  Mat p_in_, a_in_, last_h_;
  std::vector<Mat> blk_p1_, blk_a1_, blk_s_, blk_in_;
  Eigen::MatrixXi seg_;  // spline segment per (coord, sample)
  Mat segw_;             // weight within segment
};

// Standard Adam with bias correction over a flat parameter vector.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  long step_count = 0;
  Vec m, v;

  explicit AdamState(double lr = 1e-3) : learning_rate(lr) {}

  void step(Vec& params, const Vec& grads);
};

}  // namespace egl
