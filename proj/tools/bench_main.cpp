#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "egl/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Black-box optimization benchmark harness"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a suite from a config file");
  std::string config_path, out_dir;
  run->add_option("--config", config_path, "Suite config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the config)");

  auto* list = app.add_subcommand("list", "List benchmark functions and optimizers");

  auto* curve = app.add_subcommand("curve", "Scaled-distance curve of one run");
  std::string run_path;
  double ystar = std::numeric_limits<double>::quiet_NaN();
  curve->add_option("--run", run_path, "Per-run trace CSV")->required();
  curve->add_option("--ystar", ystar, "Reference optimum (default: best value in the trace)");

  auto* summarize = app.add_subcommand("summarize", "Rebuild summary.csv from a results directory");
  std::string dir;
  summarize->add_option("--dir", dir, "Results directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      egl::SuiteConfig cfg = egl::SuiteConfig::load(config_path);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      egl::SuiteResult result = egl::run_suite(cfg);
      std::cout << result.summary_csv();
      int failed = 0;
      for (const auto& c : result.runs)
        if (c.failed) {
          ++failed;
          std::cerr << "FAILED " << c.problem << " " << c.optimizer << " seed " << c.seed << ": "
                    << c.error << "\n";
        }
      return failed == 0 ? 0 : 1;
    }

    if (list->parsed()) {
      std::cout << "benchmark functions (use as name:dim:instance_seed):\n";
      for (const auto& name : egl::benchmark_names()) std::cout << "  " << name << "\n";
      std::cout << "optimizers:\n";
      for (const char* k : {"egl", "igl", "cegl", "nelder_mead", "random_search"})
        std::cout << "  " << k << "\n";
      return 0;
    }

    if (curve->parsed()) {
      std::ifstream in(run_path);
      if (!in) throw std::runtime_error("cannot open " + run_path);
      egl::RunRecord rec;
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        egl::TracePoint tp;
        if (std::sscanf(line.c_str(), "%ld,%lf,%lf", &tp.t, &tp.y, &tp.y_best) == 3)
          rec.trace.push_back(tp);
      }
      if (rec.trace.empty()) throw std::runtime_error("empty trace");
      const double y0 = rec.trace.front().y;
      const double ys = std::isnan(ystar) ? rec.trace.back().y_best : ystar;
      std::cout << "t,delta_y\n";
      for (const auto& [t, v] : egl::downsample_curve(egl::scaled_distance_curve(rec, y0, ys)))
        std::cout << t << "," << egl::format_double(v) << "\n";
      return 0;
    }

    if (summarize->parsed()) {
      std::cout << egl::summarize_dir(dir);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
