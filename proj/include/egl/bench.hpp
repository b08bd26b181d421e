#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "egl/baselines.hpp"
#include "egl/core.hpp"
#include "egl/objectives.hpp"
#include "egl/optimizer.hpp"

namespace egl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  std::string family;
  int dim = 0;
  std::uint64_t instance_seed = 0;

  std::string id() const;        // "family:dim:seed"
  std::string file_stem() const; // "family-dim-seed"
};

ProblemSpec parse_problem(const std::string& text);

struct OptimizerSpec {
  std::string name;  // label in outputs; also the config section carrying overrides
  std::string kind;  // egl | igl | cegl | nelder_mead | random_search
  std::map<std::string, std::string> overrides;
};

struct SuiteConfig {
  std::vector<ProblemSpec> objectives;
  std::vector<OptimizerSpec> optimizers;
  std::vector<std::uint64_t> seeds;
  std::int64_t budget = 10000;
  std::string output_dir;  // empty keeps everything in memory
  int workers = 1;

  // Flat key-value text: a [suite] section plus one section of overrides per
  // optimizer. Throws ConfigError on malformed input.
  static SuiteConfig parse(const std::string& text);
  static SuiteConfig load(const std::string& path);
};

struct CellResult {
  std::string problem;
  std::string optimizer;
  std::uint64_t seed = 0;
  RunRecord record;
  double y0 = 0.0;
  std::optional<double> y_star_analytic;
  bool failed = false;
  std::string error;
};

struct SuiteResult {
  std::vector<CellResult> runs;
  std::map<std::string, double> y_star_ref;  // per problem: best value over all runs

  std::string summary_csv() const;
  // Success rate over seeds of one (problem, optimizer) cell, per the
  // suite-wide y* reference.
  double success_rate(const std::string& problem, const std::string& optimizer) const;
  // Median over seeds of the final scaled distance.
  double median_final_delta(const std::string& problem, const std::string& optimizer) const;
};

// Both tests of the run-success criterion: absolute closeness to y* and
// relative improvement over the starting value.
bool success(double y_best, double y0, double y_star);

// (min_{k<=t} y_k - y*) / (y0 - y*) per evaluation index, in [0, 1].
std::vector<double> scaled_distance_curve(const RunRecord& run, double y0, double y_star);

// Geometric (powers of 1.1) downsampling; keeps the first and last index.
std::vector<std::pair<std::int64_t, double>> downsample_curve(const std::vector<double>& curve);

SuiteResult run_suite(const SuiteConfig& cfg);

// Rebuilds the summary from per-run files in a directory; the cross-check
// path for persisted suites.
std::string summarize_dir(const std::string& dir);

// Shared starting point for every optimizer racing on (problem, seed).
Vec suite_start_point(const Objective& obj, const std::string& problem_id, std::uint64_t seed);

EglConfig egl_config_from_overrides(const std::map<std::string, std::string>& kv);
ConvergentEglConfig cegl_config_from_overrides(const std::map<std::string, std::string>& kv);

}  // namespace egl
