#include "egl/optimizer.hpp"

#include <cmath>
#include <deque>

namespace egl {

ExplorationBatch explore_ball(const Vec& center, double eps, int m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  ExplorationBatch b;
  b.center = center;
  b.epsilon = eps;
  b.mode = SampleMode::box;
  b.points.resize(m);
  const int n = static_cast<int>(center.size());
  for (int i = 0; i < m; ++i) {
    Vec x = center;
    for (int d = 0; d < n; ++d) x[d] += eps * rng.uniform(-1.0, 1.0);
    b.points[i].x = std::move(x);
  }
  return b;
}

namespace {

Vec cone_offset(int n, double eps, const Vec& axis, double half_angle, Rng& rng) {
  const double cos_lim = std::cos(half_angle);
  for (int tries = 0; tries < 100; ++tries) {
    Vec u = rng.ball_vec(n, eps);
    const double nrm = u.norm();
    if (nrm < 1e-300) return u;  // apex counts as inside
    if (u.dot(axis) >= nrm * cos_lim) return u;
  }
  // Directional resample: angle uniform in [0, half_angle], tangent uniform,
  // radius as in the ball. Inside the cone by construction.
  const double theta = half_angle * rng.uniform();
  Vec w = rng.normal_vec(n);
  w -= w.dot(axis) * axis;
  double wn = w.norm();
  while (wn < 1e-12) {
    w = rng.normal_vec(n);
    w -= w.dot(axis) * axis;
    wn = w.norm();
  }
  w /= wn;
  const double r = eps * std::pow(rng.uniform(), 1.0 / n);
  return r * (std::cos(theta) * axis + std::sin(theta) * w);
}

}  // namespace

ExplorationBatch explore_cone(const Vec& center, double eps, int m, const Vec& g_prev, double phi,
                              Rng& rng) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (!(phi > 0.0) || !(phi < M_PI)) throw std::invalid_argument("phi must be in (0, pi)");
  const double gn = g_prev.norm();
  if (gn == 0.0) throw ZeroGradient();
  const Vec axis = -g_prev / gn;
  const int n = static_cast<int>(center.size());

  ExplorationBatch b;
  b.center = center;
  b.epsilon = eps;
  b.mode = SampleMode::cone;
  b.points.resize(m);
  for (int i = 0; i < m; ++i) b.points[i].x = center + cone_offset(n, eps, axis, 0.5 * phi, rng);
  return b;
}

ExplorationBatch explore_half_half(const Vec& center, double eps, int m, const Vec& g_prev,
                                   double phi, Rng& rng) {
  if (m < 2) throw std::invalid_argument("m must be >= 2");
  if (g_prev.norm() == 0.0) return explore_ball(center, eps, m, rng);
  const int m_cone = (m + 1) / 2;
  ExplorationBatch b = explore_cone(center, eps, m_cone, g_prev, phi, rng);
  ExplorationBatch rest = explore_ball(center, eps, m - m_cone, rng);
  for (auto& p : rest.points) b.points.push_back(std::move(p));
  b.mode = SampleMode::box;  // every point satisfies the inf-norm bound
  return b;
}

namespace {

// Shared scaffolding of the practical EGL/IGL loops; the two differ only in
// the surrogate they train and the direction they descend.
class DynamicLoop {
 public:
  DynamicLoop(const EglConfig& cfg, BudgetedObjective& obj, const Vec& x0, std::uint64_t seed,
              EglDiagnostics* diag, bool value_model)
      : cfg_(cfg),
        obj_(obj),
        diag_(diag),
        value_model_(value_model),
        root_(seed),
        explore_rng_(root_.stream(rng_stream::kExplore)),
        minibatch_rng_(root_.stream(rng_stream::kMinibatch)),
        tr_(TrustRegion::box(obj.objective().lo, obj.objective().hi)),
        map_(tr_),
        om_(cfg.om_lr),
        replay_(cfg.replay_batches) {
    const int n = obj_.objective().dim;
    eps_ = cfg_.epsilon > 0.0 ? cfg_.epsilon : 0.1 * std::sqrt(static_cast<double>(n));

    NetConfig nc;
    nc.input_dim = n;
    nc.output_dim = value_model_ ? 1 : n;
    nc.width = cfg_.width;
    nc.res_blocks = cfg_.res_blocks;
    nc.activation = cfg_.activation;
    nc.spline = cfg_.spline;
    nc.spline_count = cfg_.spline_count;
    Rng init_rng = root_.stream(rng_stream::kWeightInit);
    model_.emplace(nc, init_rng);
    adam_.emplace(cfg_.g_lr);

    xt_ = map_.forward(x0, diag_ ? &diag_->clamp_events : nullptr);
  }

  void run() {
    const int n = obj_.objective().dim;
    try {
      for (int w = 0; w < cfg_.warmup_factor; ++w) {
        push_batch(explore_ball(xt_, eps_, cfg_.m, explore_rng_));
        train();
      }
      while (true) {
        push_batch(sample_batch());
        train();
        Vec gt = descent_direction();
        Vec next = xt_ - cfg_.alpha * gt;
        for (int d = 0; d < n; ++d) {
          if (std::abs(next[d]) > cfg_.xt_clamp) {
            next[d] = std::clamp(next[d], -cfg_.xt_clamp, cfg_.xt_clamp);
            if (diag_) ++diag_->step_clamp_events;
          }
        }
        const double y_next = obj_(map_.inverse(next));
        if (diag_) ++diag_->descent_steps;

        // Running-mean relaxation: a candidate is a non-improvement when it is
        // worse than the mean of the previous n_max candidate values.
        if (!recent_.empty()) {
          double mean = 0.0;
          for (double v : recent_) mean += v;
          mean /= static_cast<double>(recent_.size());
          if (y_next > mean)
            ++stall_count_;
          else
            stall_count_ = 0;
        }
        recent_.push_back(y_next);
        if (recent_.size() > static_cast<std::size_t>(cfg_.n_max)) recent_.pop_front();

        ++iters_in_tr_;
        if (stall_count_ >= cfg_.n_max && iters_in_tr_ >= cfg_.n_min) {
          shrink();
        } else {
          xt_ = next;
        }
      }
    } catch (const BudgetExhausted&) {
      // normal termination
    }
  }

 private:
  void push_batch(ExplorationBatch batch) {
    // Evaluate through the inverse map; y stays raw in the buffer. If the
    // budget dies mid-batch the evaluated prefix still lands in the trace
    // via obj_'s accounting, and the run ends here.
    std::vector<double> ys;
    ys.reserve(batch.points.size());
    for (auto& p : batch.points) {
      p.y = obj_(map_.inverse(p.x));
      ys.push_back(p.y);
    }
    replay_.push(std::move(batch));
    om_.fit(ys);
  }

  ExplorationBatch sample_batch() {
    if (cfg_.explore_mode != ExploreMode::ball) {
      const Vec g = descent_direction();
      if (g.norm() > 0.0) {
        if (cfg_.explore_mode == ExploreMode::cone)
          return explore_cone(xt_, eps_, cfg_.m, g, cfg_.phi, explore_rng_);
        return explore_half_half(xt_, eps_, cfg_.m, g, cfg_.phi, explore_rng_);
      }
    }
    return explore_ball(xt_, eps_, cfg_.m, explore_rng_);
  }

  Vec descent_direction() {
    if (value_model_) return model_->input_gradient(xt_);
    return model_->forward1(xt_);
  }

  void train() {
    auto y_map = [this](double y) { return om_.forward(y); };
    if (value_model_) {
      train_value();
    } else {
      PairLossConfig plc;
      plc.epsilon = eps_;
      plc.perturbation_p = cfg_.perturbation_p * eps_;
      plc.minibatch_pairs = cfg_.minibatch_pairs;
      plc.n_minibatches = cfg_.n_minibatches;
      plc.learning_rate = cfg_.g_lr;
      train_gradient_model(*model_, *adam_, replay_, plc, minibatch_rng_, y_map);
    }
  }

  void train_value() {
    const int n = obj_.objective().dim;
    const int B = std::min<std::size_t>(cfg_.minibatch_pairs, replay_.total_points());
    Mat X(n, B);
    Vec target(B);
    for (int it = 0; it < cfg_.n_minibatches; ++it) {
      for (int b = 0; b < B; ++b) {
        const EvalPoint& p = replay_.sample_point(minibatch_rng_);
        X.col(b) = p.x;
        target[b] = om_.forward(p.y);
      }
      Mat out = model_->forward(X);
      Mat dY(1, B);
      const double inv_b = 1.0 / static_cast<double>(B);
      for (int b = 0; b < B; ++b) dY(0, b) = 2.0 * (out(0, b) - target[b]) * inv_b;
      model_->zero_grad();
      model_->backward(dY);
      adam_->step(model_->params(), model_->grads());
    }
  }

  void shrink() {
    const Objective& o = obj_.objective();
    TrustRegion next_tr = shrink_trust_region(tr_, obj_.x_best(), cfg_.gamma_alpha, o.lo, o.hi);
    InputMap next_map(next_tr, map_.clamp_delta());

    // Re-express stored exploration batches in the new coordinates and
    // rebuild their metadata from the remapped points.
    for (std::size_t bi = 0; bi < replay_.size(); ++bi) {
      ExplorationBatch& b = replay_.batch(bi);
      long* clamps = diag_ ? &diag_->clamp_events : nullptr;
      for (auto& p : b.points) p.x = next_map.forward(map_.inverse(p.x), clamps);
      b.center = next_map.forward(map_.inverse(b.center), clamps);
      double r = 0.0;
      for (const auto& p : b.points) {
        const Vec d = p.x - b.center;
        r = std::max(r, b.mode == SampleMode::box ? d.cwiseAbs().maxCoeff() : d.norm());
      }
      b.epsilon = r;
    }

    tr_ = std::move(next_tr);
    map_ = std::move(next_map);
    eps_ *= cfg_.gamma_epsilon;
    xt_ = map_.forward(obj_.x_best(), diag_ ? &diag_->clamp_events : nullptr);
    stall_count_ = 0;
    iters_in_tr_ = 0;
    recent_.clear();
    if (diag_) {
      ++diag_->tr_shrinks;
      diag_->tr_widths.push_back(tr_.width());
      diag_->epsilons.push_back(eps_);
    }
  }

  const EglConfig& cfg_;
  BudgetedObjective& obj_;
  EglDiagnostics* diag_;
  bool value_model_;

  Rng root_, explore_rng_, minibatch_rng_;
  TrustRegion tr_;
  InputMap map_;
  OutputMap om_;
  ReplayBuffer replay_;
  std::optional<Net> model_;
  std::optional<AdamState> adam_;

  Vec xt_;
  double eps_ = 0.0;
  int stall_count_ = 0;
  int iters_in_tr_ = 0;
  std::deque<double> recent_;
};

std::uint64_t egl_config_hash(const EglConfig& c, bool value_model) {
  std::string s = value_model ? "igl|" : "egl|";
  for (double v : {static_cast<double>(c.m), static_cast<double>(c.warmup_factor), c.alpha,
                   c.epsilon, c.gamma_alpha, c.gamma_epsilon, static_cast<double>(c.n_max),
                   static_cast<double>(c.n_min), static_cast<double>(c.replay_batches),
                   static_cast<double>(static_cast<int>(c.explore_mode)), c.phi, c.perturbation_p,
                   c.xt_clamp, static_cast<double>(c.minibatch_pairs),
                   static_cast<double>(c.n_minibatches), c.g_lr, c.om_lr,
                   static_cast<double>(c.width), static_cast<double>(c.res_blocks),
                   static_cast<double>(c.spline), static_cast<double>(c.spline_count),
                   static_cast<double>(static_cast<int>(c.activation))})
    s += format_double(v) + ",";
  return fnv1a(s);
}

}  // namespace

RunRecord run_egl(const EglConfig& cfg, BudgetedObjective& obj, const Vec& x0, std::uint64_t seed,
                  EglDiagnostics* diag) {
  DynamicLoop loop(cfg, obj, x0, seed, diag, /*value_model=*/false);
  loop.run();
  return obj.record(seed, egl_config_hash(cfg, false));
}

RunRecord run_igl(const EglConfig& cfg, BudgetedObjective& obj, const Vec& x0, std::uint64_t seed,
                  EglDiagnostics* diag) {
  DynamicLoop loop(cfg, obj, x0, seed, diag, /*value_model=*/true);
  loop.run();
  return obj.record(seed, egl_config_hash(cfg, true));
}

ConvergentRunResult run_convergent_egl(const ConvergentEglConfig& cfg, BudgetedObjective& obj,
                                       const Vec& x0, std::uint64_t seed) {
  const Objective& o = obj.objective();
  const int n = o.dim;
  const int m = cfg.m > 0 ? cfg.m : 2 * (n + 1);

  Rng root(seed);
  Rng explore_rng = root.stream(rng_stream::kExplore);

  ConvergentRunResult res;
  res.x_final = x0;
  res.final_epsilon = cfg.epsilon;
  res.final_alpha = cfg.alpha;

  double eps = cfg.epsilon;
  double alpha = cfg.alpha;
  Vec x = x0;

  std::optional<Net> model;
  std::optional<AdamState> adam;
  if (cfg.grad_source == GradSource::model) {
    NetConfig nc;
    nc.input_dim = n;
    nc.output_dim = n;
    nc.width = 32;
    nc.res_blocks = 1;
    nc.spline = false;
    Rng init_rng = root.stream(rng_stream::kWeightInit);
    model.emplace(nc, init_rng);
    adam.emplace(1e-3);
  }

  auto clamp_box = [&](Vec v) {
    for (int i = 0; i < n; ++i) v[i] = std::clamp(v[i], o.lo[i], o.hi[i]);
    return v;
  };

  try {
    if (eps > cfg.epsilon_bar) {
      double f_prev = obj(x);
      while (true) {
        // Fresh local batch; enlarge on the rare non-poised draw.
        Vec g;
        int batch_m = m;
        for (int attempt = 0;; ++attempt) {
          std::vector<Vec> xs(batch_m);
          std::vector<double> ys(batch_m);
          for (int i = 0; i < batch_m; ++i) {
            xs[i] = clamp_box(x + explore_rng.ball_vec(n, eps));
            ys[i] = obj(xs[i]);
          }
          try {
            if (cfg.grad_source == GradSource::least_squares) {
              g = ls_mean_gradient(xs, ys).g_mse;
            } else {
              ReplayBuffer rb(1);
              ExplorationBatch b;
              b.center = x;
              b.epsilon = eps;
              b.mode = SampleMode::ball;
              b.points.resize(batch_m);
              for (int i = 0; i < batch_m; ++i) b.points[i] = {xs[i], ys[i]};
              rb.push(std::move(b));
              PairLossConfig plc;
              plc.epsilon = eps;
              plc.minibatch_pairs = 512;
              plc.n_minibatches = 40;
              train_gradient_model(*model, *adam, rb, plc, explore_rng);
              g = model->forward1(x);
            }
            break;
          } catch (const NotPoised&) {
            if (attempt >= 8) throw;
            batch_m += n + 1;
          }
        }

        const Vec x_next = clamp_box(x - alpha * g);
        const double f_next = obj(x_next);
        const bool passed = f_next <= f_prev - cfg.descent_margin * eps * eps / alpha;
        res.steps.push_back({f_prev, f_next, eps, alpha, passed});
        if (!passed) {
          res.x_final = x;  // stall point at this accuracy level
          if (eps <= cfg.epsilon_bar) {
            res.final_epsilon = eps;
            res.final_alpha = alpha;
            break;
          }
          alpha *= cfg.gamma_alpha;
          eps *= cfg.gamma_alpha * cfg.gamma_epsilon;
        }
        x = x_next;
        f_prev = f_next;
        res.final_epsilon = eps;
        res.final_alpha = alpha;
      }
    }
  } catch (const BudgetExhausted&) {
    res.x_final = x;
    res.final_epsilon = eps;
    res.final_alpha = alpha;
  }

  std::string cfg_str = "cegl|";
  for (double v : {cfg.alpha, cfg.epsilon, cfg.gamma_alpha, cfg.gamma_epsilon, cfg.epsilon_bar,
                   static_cast<double>(m), static_cast<double>(static_cast<int>(cfg.grad_source)),
                   cfg.descent_margin})
    cfg_str += format_double(v) + ",";
  res.record = obj.record(seed, fnv1a(cfg_str));
  return res;
}

}  // namespace egl
