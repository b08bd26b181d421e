#include "egl/gradnet.hpp"

#include <Eigen/Dense>

namespace egl {

namespace {

// Stacked ordered-pair difference system: row x_j - x_i, target y_j - y_i.
void build_design(const std::vector<Vec>& xs, const std::vector<double>& ys, Mat& X, Vec& delta) {
  const std::size_t m = xs.size();
  const int n = static_cast<int>(xs[0].size());
  X.resize(static_cast<Eigen::Index>(m * (m - 1)), n);
  delta.resize(static_cast<Eigen::Index>(m * (m - 1)));
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      X.row(r) = (xs[j] - xs[i]).transpose();
      delta[r] = ys[j] - ys[i];
      ++r;
    }
}

int svd_rank(const Mat& X) {
  Eigen::JacobiSVD<Mat> svd(X);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = 1e-10 * sv[0];
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  return rank;
}

LsSolution solve_ls(const std::vector<Vec>& xs, const std::vector<double>& ys, bool use_svd) {
  if (xs.size() < 2) throw std::invalid_argument("need at least 2 points");
  const int n = static_cast<int>(xs[0].size());
  Mat X;
  Vec delta;
  build_design(xs, ys, X, delta);

  LsSolution sol;
  sol.design_rank = svd_rank(X);
  if (sol.design_rank < n) throw NotPoised(sol.design_rank, n);

  if (use_svd) {
    Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    sol.g_mse = svd.solve(delta);
  } else {
    sol.g_mse = X.colPivHouseholderQr().solve(delta);
  }
  sol.residual = (X * sol.g_mse - delta).squaredNorm();
  return sol;
}

std::vector<Vec> batch_xs(const ExplorationBatch& b) {
  std::vector<Vec> xs;
  xs.reserve(b.size());
  for (const auto& p : b.points) xs.push_back(p.x);
  return xs;
}

std::vector<double> batch_ys(const ExplorationBatch& b) {
  std::vector<double> ys;
  ys.reserve(b.size());
  for (const auto& p : b.points) ys.push_back(p.y);
  return ys;
}

}  // namespace

bool is_poised(const std::vector<Vec>& points, const Vec& /*center*/) {
  if (points.size() < 2) return false;
  const int n = static_cast<int>(points[0].size());
  const std::size_t m = points.size();
  Mat X(static_cast<Eigen::Index>(m * (m - 1)), n);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      X.row(r++) = (points[i] - points[j]).transpose();
    }
  return svd_rank(X) == n;
}

LsSolution ls_mean_gradient(const ExplorationBatch& batch) {
  return solve_ls(batch_xs(batch), batch_ys(batch), /*use_svd=*/false);
}

LsSolution ls_mean_gradient(const std::vector<Vec>& xs, const std::vector<double>& ys) {
  return solve_ls(xs, ys, /*use_svd=*/false);
}

LsSolution ls_mean_gradient_svd(const ExplorationBatch& batch) {
  return solve_ls(batch_xs(batch), batch_ys(batch), /*use_svd=*/true);
}

double pair_loss(Net& model, const std::vector<ReplayBuffer::PointPair>& pairs, double p,
                 Rng& perturb_rng, const std::function<double(double)>& y_map) {
  if (pairs.empty()) throw std::invalid_argument("no pairs");
  const int n = model.input_dim();
  const int B = static_cast<int>(pairs.size());

  Mat refs(n, B);   // g's evaluation points x_i (+ dither)
  Mat diffs(n, B);  // x_j - x_i
  Vec dy(B);
  for (int b = 0; b < B; ++b) {
    const EvalPoint& pi = *pairs[b].first;
    const EvalPoint& pj = *pairs[b].second;
    Vec ref = pi.x;
    if (p > 0.0) ref += perturb_rng.ball_vec(n, p);
    refs.col(b) = ref;
    diffs.col(b) = pj.x - pi.x;
    const double yi = y_map ? y_map(pi.y) : pi.y;
    const double yj = y_map ? y_map(pj.y) : pj.y;
    dy[b] = yj - yi;
  }

  Mat G = model.forward(refs);
  Vec resid(B);
  for (int b = 0; b < B; ++b) resid[b] = diffs.col(b).dot(G.col(b)) - dy[b];

  Mat dG(n, B);
  const double inv_b = 1.0 / static_cast<double>(B);
  for (int b = 0; b < B; ++b) dG.col(b) = 2.0 * resid[b] * inv_b * diffs.col(b);
  model.backward(dG);

  return resid.squaredNorm() * inv_b;
}

double pair_loss_value(Net& model, const std::vector<ReplayBuffer::PointPair>& pairs,
                       const std::function<double(double)>& y_map) {
  if (pairs.empty()) throw std::invalid_argument("no pairs");
  const int n = model.input_dim();
  const int B = static_cast<int>(pairs.size());
  Mat refs(n, B);
  double loss = 0.0;
  for (int b = 0; b < B; ++b) refs.col(b) = pairs[b].first->x;
  Mat G = model.forward(refs);
  for (int b = 0; b < B; ++b) {
    const EvalPoint& pi = *pairs[b].first;
    const EvalPoint& pj = *pairs[b].second;
    const double yi = y_map ? y_map(pi.y) : pi.y;
    const double yj = y_map ? y_map(pj.y) : pj.y;
    const double r = (pj.x - pi.x).dot(G.col(b)) - (yj - yi);
    loss += r * r;
  }
  return loss / static_cast<double>(B);
}

double constant_pair_loss(const Vec& g, const std::vector<ReplayBuffer::PointPair>& pairs,
                          const std::function<double(double)>& y_map) {
  if (pairs.empty()) throw std::invalid_argument("no pairs");
  double loss = 0.0;
  for (const auto& [pi, pj] : pairs) {
    const double yi = y_map ? y_map(pi->y) : pi->y;
    const double yj = y_map ? y_map(pj->y) : pj->y;
    const double r = (pj->x - pi->x).dot(g) - (yj - yi);
    loss += r * r;
  }
  return loss / static_cast<double>(pairs.size());
}

void train_gradient_model(Net& model, AdamState& adam, const ReplayBuffer& rb,
                          const PairLossConfig& cfg, Rng& rng,
                          const std::function<double(double)>& y_map) {
  if (rb.empty()) throw EmptyBuffer();
  const std::size_t total = rb.total_pairs();
  if (total == 0) throw std::invalid_argument("buffer holds no pairs");
  adam.learning_rate = cfg.learning_rate;

  const bool exhaustive = total <= static_cast<std::size_t>(cfg.minibatch_pairs);
  std::vector<ReplayBuffer::PointPair> pairs;
  if (exhaustive) pairs = rb.all_pairs();

  for (int it = 0; it < cfg.n_minibatches; ++it) {
    if (!exhaustive) {
      pairs.clear();
      pairs.reserve(cfg.minibatch_pairs);
      for (int i = 0; i < cfg.minibatch_pairs; ++i) pairs.push_back(rb.sample_pair(rng));
    }
    model.zero_grad();
    pair_loss(model, pairs, cfg.perturbation_p, rng, y_map);
    adam.step(model.params(), model.grads());
  }
}

Vec fd_gradient_oracle(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace egl
