#pragma once

#include <functional>

#include "egl/core.hpp"
#include "egl/nn.hpp"

namespace egl {

struct NotPoised : std::runtime_error {
  explicit NotPoised(int rank, int n)
      : std::runtime_error("sample set not poised: difference rank " + std::to_string(rank) +
                           " < " + std::to_string(n)) {}
};

// Closed-form least-squares mean-gradient over the ordered within-batch pair
// differences. g_mse is defined only when design_rank equals the dimension.
struct LsSolution {
  Vec g_mse;
  int design_rank = 0;
  double residual = 0.0;  // squared residual norm
};

// A set is poised when its pairwise difference vectors span R^n; rank is
// decided by SVD with cutoff 1e-10 * sigma_max.
bool is_poised(const std::vector<Vec>& points, const Vec& center);

LsSolution ls_mean_gradient(const ExplorationBatch& batch);
LsSolution ls_mean_gradient(const std::vector<Vec>& xs, const std::vector<double>& ys);
// Same normal system solved by full SVD instead of column-pivoted QR; the two
// routes must agree on poised sets.
LsSolution ls_mean_gradient_svd(const ExplorationBatch& batch);

struct PairLossConfig {
  double epsilon = 0.1;
  double perturbation_p = 0.0;  // reference-point dither radius, << epsilon
  int minibatch_pairs = 1024;
  int n_minibatches = 60;
  double learning_rate = 1e-3;
};

// Mean over the given ordered pairs of |(x_j - x_i) . g(x_i + n_i) - y_j + y_i|^2
// with n_i uniform in the p-ball (p = 0 evaluates exactly at x_i). Parameter
// gradients are accumulated into the model; y values pass through y_map.
double pair_loss(Net& model, const std::vector<ReplayBuffer::PointPair>& pairs, double p,
                 Rng& perturb_rng,
                 const std::function<double(double)>& y_map = nullptr);

// Loss only, no gradient accumulation.
double pair_loss_value(Net& model, const std::vector<ReplayBuffer::PointPair>& pairs,
                       const std::function<double(double)>& y_map = nullptr);
// Loss of a constant gradient model (e.g. the LS solution) on the same pairs.
double constant_pair_loss(const Vec& g, const std::vector<ReplayBuffer::PointPair>& pairs,
                          const std::function<double(double)>& y_map = nullptr);

// cfg.n_minibatches Adam steps; each minibatch samples cfg.minibatch_pairs
// ordered within-batch pairs uniformly from the buffer (exhaustive when the
// buffer holds no more pairs than one minibatch). Training warm-starts from
// the model's current weights.
void train_gradient_model(Net& model, AdamState& adam, const ReplayBuffer& rb,
                          const PairLossConfig& cfg, Rng& rng,
                          const std::function<double(double)>& y_map = nullptr);

// Independent test oracle: central differences per coordinate.
Vec fd_gradient_oracle(const std::function<double(const Vec&)>& f, const Vec& x, double h);

}  // namespace egl
