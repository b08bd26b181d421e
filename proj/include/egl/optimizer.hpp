#pragma once

#include "egl/core.hpp"
#include "egl/gradnet.hpp"
#include "egl/mappings.hpp"
#include "egl/nn.hpp"
#include "egl/objectives.hpp"

namespace egl {

struct ZeroGradient : std::runtime_error {
  ZeroGradient() : std::runtime_error("previous gradient is zero; cone needs a direction") {}
};

enum class ExploreMode { ball, cone, half_half };

// Table-1 ball-explore: independent per-coordinate uniform, an inf-norm box.
ExplorationBatch explore_ball(const Vec& center, double eps, int m, Rng& rng);

// Points inside the L2 eps-ball whose offset makes an angle of at most phi/2
// with -g_prev (phi is the full cone aperture). Rejection sampling with a
// directional resample fallback after 100 rejections per point.
ExplorationBatch explore_cone(const Vec& center, double eps, int m, const Vec& g_prev, double phi,
                              Rng& rng);

// ceil(m/2) cone points plus floor(m/2) ball points; all of it from the box
// sampler when g_prev vanishes.
ExplorationBatch explore_half_half(const Vec& center, double eps, int m, const Vec& g_prev,
                                   double phi, Rng& rng);

struct EglConfig {
  int m = 64;              // exploration points per step
  int warmup_factor = 5;   // warmup evaluations = warmup_factor * m
  double alpha = 1e-2;     // step size in mapped space
  double epsilon = 0.0;    // initial mapped-space radius; 0 -> 0.1 * sqrt(n)
  double gamma_alpha = 0.9;
  double gamma_epsilon = 0.97;
  int n_max = 10;          // consecutive non-improvements before TR shrink
  int n_min = 40;          // minimum descent iterations per trust region
  int replay_batches = 32; // L
  ExploreMode explore_mode = ExploreMode::ball;
  double phi = 2.0943951023931953;  // cone aperture, 2*pi/3
  double perturbation_p = 0.0;      // dither radius as a fraction of the current epsilon
  double xt_clamp = 10.0;           // mapped-space candidate box

  int minibatch_pairs = 1024;
  int n_minibatches = 60;
  double g_lr = 1e-3;
  double om_lr = 0.1;

  int width = 64;
  int res_blocks = 2;
  bool spline = true;
  int spline_count = 8;
  Activation activation = Activation::tanh;
};

struct EglDiagnostics {
  int descent_steps = 0;
  int tr_shrinks = 0;
  long clamp_events = 0;       // arctanh-argument clamps
  long step_clamp_events = 0;  // mapped-space candidate box clamps
  std::vector<Vec> tr_widths;  // trust-region widths after each shrink
  std::vector<double> epsilons;
};

RunRecord run_egl(const EglConfig& cfg, BudgetedObjective& obj, const Vec& x0, std::uint64_t seed,
                  EglDiagnostics* diag = nullptr);

// Identical scaffolding (exploration, mappings, trust regions, replay), but
// fits a scalar value model and descends its input gradient.
RunRecord run_igl(const EglConfig& cfg, BudgetedObjective& obj, const Vec& x0, std::uint64_t seed,
                  EglDiagnostics* diag = nullptr);

enum class GradSource { least_squares, model };

struct ConvergentEglConfig {
  double alpha = 0.1;
  double epsilon = 0.5;
  double gamma_alpha = 0.9;
  double gamma_epsilon = 0.97;
  double epsilon_bar = 1e-2;
  int m = 0;  // exploration points per step; 0 -> 2*(n+1)
  GradSource grad_source = GradSource::least_squares;
  // Sufficient-decrease test: f(x+) <= f(x) - margin * eps^2 / alpha.
  double descent_margin = 2.25;
};

struct CeglStepLog {
  double f_prev = 0.0, f_next = 0.0;
  double eps = 0.0, alpha = 0.0;
  bool passed = false;
};

struct ConvergentRunResult {
  RunRecord record;
  Vec x_final;  // the point where descent stalled at the final accuracy level
  double final_epsilon = 0.0;
  double final_alpha = 0.0;
  std::vector<CeglStepLog> steps;
};

// Decay-until-stall loop: runs while eps > epsilon_bar; after the decay that
// drops eps to or below epsilon_bar it keeps stepping at that final level
// until the sufficient-decrease test fails once more, then stops.
ConvergentRunResult run_convergent_egl(const ConvergentEglConfig& cfg, BudgetedObjective& obj,
                                       const Vec& x0, std::uint64_t seed);

}  // namespace egl
