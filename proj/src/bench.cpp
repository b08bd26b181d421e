#include "egl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "egl/mappings.hpp"  // sample_quantile

namespace egl {

namespace fs = std::filesystem;

std::string ProblemSpec::id() const {
  return family + ":" + std::to_string(dim) + ":" + std::to_string(instance_seed);
}

std::string ProblemSpec::file_stem() const {
  return family + "-" + std::to_string(dim) + "-" + std::to_string(instance_seed);
}

ProblemSpec parse_problem(const std::string& text) {
  ProblemSpec p;
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw ConfigError("problem must be name:dim:seed, got '" + text + "'");
  p.family = text.substr(0, c1);
  try {
    p.dim = std::stoi(text.substr(c1 + 1, c2 - c1 - 1));
    p.instance_seed = std::stoull(text.substr(c2 + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad problem spec '" + text + "'");
  }
  if (p.dim <= 0) throw ConfigError("dim must be positive in '" + text + "'");
  return p;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  return static_cast<int>(to_double(key, v));
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

const std::vector<std::string> kKinds = {"egl", "igl", "cegl", "nelder_mead", "random_search"};

}  // namespace

EglConfig egl_config_from_overrides(const std::map<std::string, std::string>& kv) {
  EglConfig c;
  for (const auto& [k, v] : kv) {
    if (k == "m") c.m = to_int(k, v);
    else if (k == "warmup_factor") c.warmup_factor = to_int(k, v);
    else if (k == "alpha") c.alpha = to_double(k, v);
    else if (k == "epsilon") c.epsilon = to_double(k, v);
    else if (k == "gamma_alpha") c.gamma_alpha = to_double(k, v);
    else if (k == "gamma_epsilon") c.gamma_epsilon = to_double(k, v);
    else if (k == "n_max") c.n_max = to_int(k, v);
    else if (k == "n_min") c.n_min = to_int(k, v);
    else if (k == "L" || k == "replay_batches") c.replay_batches = to_int(k, v);
    else if (k == "explore_mode") {
      if (v == "ball") c.explore_mode = ExploreMode::ball;
      else if (v == "cone") c.explore_mode = ExploreMode::cone;
      else if (v == "half_half") c.explore_mode = ExploreMode::half_half;
      else throw ConfigError("unknown explore_mode '" + v + "'");
    } else if (k == "phi") c.phi = to_double(k, v);
    else if (k == "p" || k == "perturbation_p") c.perturbation_p = to_double(k, v);
    else if (k == "xt_clamp") c.xt_clamp = to_double(k, v);
    else if (k == "batch" || k == "minibatch_pairs") c.minibatch_pairs = to_int(k, v);
    else if (k == "n_minibatches") c.n_minibatches = to_int(k, v);
    else if (k == "g_lr") c.g_lr = to_double(k, v);
    else if (k == "om_lr") c.om_lr = to_double(k, v);
    else if (k == "width") c.width = to_int(k, v);
    else if (k == "res_blocks") c.res_blocks = to_int(k, v);
    else if (k == "spline") c.spline = to_int(k, v) != 0;
    else if (k == "spline_count") c.spline_count = to_int(k, v);
    else if (k == "activation") {
      if (v == "tanh") c.activation = Activation::tanh;
      else if (v == "relu") c.activation = Activation::relu;
      else throw ConfigError("unknown activation '" + v + "'");
    } else throw ConfigError("unknown egl/igl option '" + k + "'");
  }
  return c;
}

ConvergentEglConfig cegl_config_from_overrides(const std::map<std::string, std::string>& kv) {
  ConvergentEglConfig c;
  for (const auto& [k, v] : kv) {
    if (k == "alpha") c.alpha = to_double(k, v);
    else if (k == "epsilon") c.epsilon = to_double(k, v);
    else if (k == "epsilon_bar") c.epsilon_bar = to_double(k, v);
    else if (k == "gamma_alpha") c.gamma_alpha = to_double(k, v);
    else if (k == "gamma_epsilon") c.gamma_epsilon = to_double(k, v);
    else if (k == "m") c.m = to_int(k, v);
    else if (k == "grad_source") {
      if (v == "ls") c.grad_source = GradSource::least_squares;
      else if (v == "model") c.grad_source = GradSource::model;
      else throw ConfigError("unknown grad_source '" + v + "'");
    } else throw ConfigError("unknown cegl option '" + k + "'");
  }
  return c;
}

SuiteConfig SuiteConfig::parse(const std::string& text) {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string current = "suite";
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("unterminated section header at line " +
                                             std::to_string(lineno));
      current = trim(t.substr(1, t.size() - 2));
      sections[current];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    sections[current][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }

  SuiteConfig cfg;
  auto suite = sections.find("suite");
  if (suite == sections.end()) throw ConfigError("missing [suite] section");
  for (const auto& [k, v] : suite->second) {
    if (k == "objectives") {
      for (const auto& s : split_list(v)) cfg.objectives.push_back(parse_problem(s));
    } else if (k == "optimizers") {
      for (const auto& s : split_list(v)) {
        OptimizerSpec spec;
        const auto colon = s.find(':');
        spec.name = colon == std::string::npos ? s : trim(s.substr(0, colon));
        spec.kind = colon == std::string::npos ? s : trim(s.substr(colon + 1));
        if (!valid_name(spec.name)) throw ConfigError("bad optimizer name '" + spec.name + "'");
        if (std::find(kKinds.begin(), kKinds.end(), spec.kind) == kKinds.end())
          throw ConfigError("unknown optimizer kind '" + spec.kind + "'");
        cfg.optimizers.push_back(std::move(spec));
      }
    } else if (k == "seeds") {
      for (const auto& s : split_list(v)) cfg.seeds.push_back(std::stoull(s));
    } else if (k == "budget") {
      cfg.budget = static_cast<std::int64_t>(to_double(k, v));
    } else if (k == "out" || k == "output_dir") {
      cfg.output_dir = v;
    } else if (k == "workers") {
      cfg.workers = to_int(k, v);
    } else {
      throw ConfigError("unknown suite option '" + k + "'");
    }
  }

  if (cfg.objectives.empty()) throw ConfigError("objectives list is empty");
  if (cfg.optimizers.empty()) throw ConfigError("optimizers list is empty");
  if (cfg.seeds.empty()) throw ConfigError("seeds list is empty");
  if (cfg.budget <= 0) throw ConfigError("budget must be positive");
  if (cfg.workers < 1) cfg.workers = 1;

  for (auto& opt : cfg.optimizers) {
    auto sec = sections.find(opt.name);
    if (sec != sections.end()) opt.overrides = sec->second;
    // validate overrides now so errors surface before any run starts
    if (opt.kind == "egl" || opt.kind == "igl") egl_config_from_overrides(opt.overrides);
    else if (opt.kind == "cegl") cegl_config_from_overrides(opt.overrides);
    else if (opt.kind == "nelder_mead") {
      for (const auto& [k, v] : opt.overrides)
        if (k != "scale") throw ConfigError("unknown nelder_mead option '" + k + "'");
    } else if (!opt.overrides.empty()) {
      throw ConfigError("optimizer '" + opt.name + "' accepts no options");
    }
  }
  return cfg;
}

SuiteConfig SuiteConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool success(double y_best, double y0, double y_star) {
  if (!(y0 > y_star)) return y_best <= y_star + 1.0;
  return y_best - y_star <= 1.0 && (y_best - y_star) / (y0 - y_star) <= 1e-2;
}

std::vector<double> scaled_distance_curve(const RunRecord& run, double y0, double y_star) {
  std::vector<double> out;
  out.reserve(run.trace.size());
  const double denom = y0 - y_star;
  for (const auto& p : run.trace) {
    if (denom <= 0.0) {
      out.push_back(0.0);
    } else {
      out.push_back(std::clamp((p.y_best - y_star) / denom, 0.0, 1.0));
    }
  }
  return out;
}

std::vector<std::pair<std::int64_t, double>> downsample_curve(const std::vector<double>& curve) {
  std::vector<std::pair<std::int64_t, double>> out;
  const std::int64_t n = static_cast<std::int64_t>(curve.size());
  std::int64_t t = 1;
  while (t <= n) {
    out.emplace_back(t, curve[t - 1]);
    const std::int64_t next = static_cast<std::int64_t>(std::ceil(static_cast<double>(t) * 1.1));
    t = std::max(next, t + 1);
  }
  if (!out.empty() && out.back().first != n && n > 0) out.emplace_back(n, curve[n - 1]);
  return out;
}

Vec suite_start_point(const Objective& obj, const std::string& problem_id, std::uint64_t seed) {
  Rng rng(fnv1a(problem_id) ^ seed);
  Rng s = rng.stream(6);
  Vec x(obj.dim);
  for (int i = 0; i < obj.dim; ++i) x[i] = s.uniform(obj.lo[i], obj.hi[i]);
  return x;
}

namespace {

CellResult run_cell(const SuiteConfig& cfg, const ProblemSpec& prob, const OptimizerSpec& opt,
                    std::uint64_t seed) {
  CellResult cell;
  cell.problem = prob.id();
  cell.optimizer = opt.name;
  cell.seed = seed;
  try {
    Objective objective = make_benchmark(prob.family, prob.dim, prob.instance_seed);
    cell.y_star_analytic = objective.y_star;
    BudgetedObjective budgeted(objective, cfg.budget);
    const Vec x0 = suite_start_point(objective, prob.id(), seed);

    if (opt.kind == "egl" || opt.kind == "igl") {
      EglConfig ec = egl_config_from_overrides(opt.overrides);
      cell.record = opt.kind == "egl" ? run_egl(ec, budgeted, x0, seed)
                                      : run_igl(ec, budgeted, x0, seed);
    } else if (opt.kind == "cegl") {
      ConvergentEglConfig cc = cegl_config_from_overrides(opt.overrides);
      cell.record = run_convergent_egl(cc, budgeted, x0, seed).record;
    } else if (opt.kind == "nelder_mead") {
      double scale = 0.0;
      auto it = opt.overrides.find("scale");
      if (it != opt.overrides.end()) scale = to_double("scale", it->second);
      cell.record = nelder_mead(budgeted, x0, scale, seed);
    } else {
      cell.record = random_search(budgeted, seed);
    }
    cell.y0 = cell.record.trace.empty() ? 0.0 : cell.record.trace.front().y;
  } catch (const std::exception& e) {
    cell.failed = true;
    cell.error = e.what();
  }
  return cell;
}

std::string run_file_stem(const ProblemSpec& prob, const std::string& optimizer,
                          std::uint64_t seed) {
  return prob.file_stem() + "__" + optimizer + "__s" + std::to_string(seed);
}

struct CellStats {
  std::vector<double> y_bests;
  std::vector<double> evals;
  int succ = 0;
  int succ_analytic = 0;
};

}  // namespace

double SuiteResult::success_rate(const std::string& problem, const std::string& optimizer) const {
  int total = 0, succ = 0;
  const double y_star = y_star_ref.at(problem);
  for (const auto& c : runs) {
    if (c.problem != problem || c.optimizer != optimizer || c.failed) continue;
    ++total;
    if (success(c.record.y_best, c.y0, y_star)) ++succ;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(succ) / total;
}

double SuiteResult::median_final_delta(const std::string& problem,
                                       const std::string& optimizer) const {
  std::vector<double> deltas;
  const double y_star = y_star_ref.at(problem);
  for (const auto& c : runs) {
    if (c.problem != problem || c.optimizer != optimizer || c.failed) continue;
    const double denom = c.y0 - y_star;
    deltas.push_back(denom <= 0.0 ? 0.0
                                  : std::clamp((c.record.y_best - y_star) / denom, 0.0, 1.0));
  }
  if (deltas.empty()) return 1.0;
  return sample_quantile(deltas, 0.5);
}

std::string SuiteResult::summary_csv() const {
  std::string out =
      "problem,optimizer,seed_count,y_best_median,y_best_iqr,success_rate,evals,"
      "success_rate_analytic\n";

  // preserve first-appearance order of problems and optimizers
  std::vector<std::string> problems, optimizers;
  for (const auto& c : runs) {
    if (std::find(problems.begin(), problems.end(), c.problem) == problems.end())
      problems.push_back(c.problem);
    if (std::find(optimizers.begin(), optimizers.end(), c.optimizer) == optimizers.end())
      optimizers.push_back(c.optimizer);
  }

  for (const auto& prob : problems) {
    for (const auto& opt : optimizers) {
      CellStats st;
      std::optional<double> y_star_an;
      for (const auto& c : runs) {
        if (c.problem != prob || c.optimizer != opt || c.failed) continue;
        st.y_bests.push_back(c.record.y_best);
        st.evals.push_back(static_cast<double>(c.record.evaluations_used));
        if (success(c.record.y_best, c.y0, y_star_ref.at(prob))) ++st.succ;
        if (c.y_star_analytic) {
          y_star_an = c.y_star_analytic;
          if (success(c.record.y_best, c.y0, *c.y_star_analytic)) ++st.succ_analytic;
        }
      }
      if (st.y_bests.empty()) continue;
      const double n = static_cast<double>(st.y_bests.size());
      out += prob + "," + opt + "," + std::to_string(st.y_bests.size()) + "," +
             format_double(sample_quantile(st.y_bests, 0.5)) + "," +
             format_double(sample_quantile(st.y_bests, 0.75) - sample_quantile(st.y_bests, 0.25)) +
             "," + format_double(st.succ / n) + "," +
             format_double(sample_quantile(st.evals, 0.5)) + "," +
             (y_star_an ? format_double(st.succ_analytic / n) : std::string()) + "\n";
    }
  }
  return out;
}

SuiteResult run_suite(const SuiteConfig& cfg) {
  struct Cell {
    const ProblemSpec* prob;
    const OptimizerSpec* opt;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& prob : cfg.objectives)
    for (const auto& opt : cfg.optimizers)
      for (std::uint64_t seed : cfg.seeds) cells.push_back({&prob, &opt, seed});

  SuiteResult result;
  result.runs.resize(cells.size());

  const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(cells.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      result.runs[i] = run_cell(cfg, *cells[i].prob, *cells[i].opt, cells[i].seed);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        result.runs[i] = run_cell(cfg, *cells[i].prob, *cells[i].opt, cells[i].seed);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // The y* proxy: best value observed across every run on the problem.
  for (const auto& c : result.runs) {
    if (c.failed) continue;
    auto [it, inserted] = result.y_star_ref.try_emplace(c.problem, c.record.y_best);
    if (!inserted) it->second = std::min(it->second, c.record.y_best);
  }

  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    std::size_t i = 0;
    for (const auto& cell : cells) {
      const CellResult& c = result.runs[i++];
      const std::string stem = run_file_stem(*cell.prob, cell.opt->name, cell.seed);
      if (c.failed) {
        std::ofstream(fs::path(cfg.output_dir) / (stem + ".error")) << c.error << "\n";
        continue;
      }
      std::ofstream(fs::path(cfg.output_dir) / (stem + ".csv")) << c.record.to_csv();
      std::ofstream(fs::path(cfg.output_dir) / (stem + ".json")) << c.record.to_json_sidecar();
    }
    // per (problem, optimizer) averaged curves
    for (const auto& prob : cfg.objectives) {
      for (const auto& opt : cfg.optimizers) {
        std::vector<std::vector<double>> curves;
        for (const auto& c : result.runs) {
          if (c.problem != prob.id() || c.optimizer != opt.name || c.failed) continue;
          auto curve = scaled_distance_curve(c.record, c.y0, result.y_star_ref.at(prob.id()));
          if (!curve.empty()) curves.push_back(std::move(curve));
        }
        if (curves.empty()) continue;
        std::size_t len = 0;
        for (const auto& cv : curves) len = std::max(len, cv.size());
        std::vector<double> mean(len, 0.0);
        for (const auto& cv : curves)
          for (std::size_t t = 0; t < len; ++t)
            mean[t] += t < cv.size() ? cv[t] : cv.back();  // extend flat
        for (auto& v : mean) v /= static_cast<double>(curves.size());
        std::ofstream out(fs::path(cfg.output_dir) /
                          (prob.file_stem() + "__" + opt.name + "__curve.csv"));
        out << "t,delta_y\n";
        for (const auto& [t, v] : downsample_curve(mean))
          out << t << "," << format_double(v) << "\n";
      }
    }
    std::ofstream(fs::path(cfg.output_dir) / "summary.csv") << result.summary_csv();
  }
  return result;
}

std::string summarize_dir(const std::string& dir) {
  SuiteResult result;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() == ".csv" && name.find("__curve") == std::string::npos &&
        name != "summary.csv")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& path : files) {
    // stem: family-dim-seed__optimizer__s<seed>
    const std::string stem = path.stem().string();
    const auto p1 = stem.find("__");
    const auto p2 = stem.rfind("__s");
    if (p1 == std::string::npos || p2 == std::string::npos || p2 <= p1) continue;

    std::string probpart = stem.substr(0, p1);
    std::replace(probpart.begin(), probpart.end(), '-', ':');

    CellResult cell;
    cell.problem = probpart;
    cell.optimizer = stem.substr(p1 + 2, p2 - p1 - 2);
    cell.seed = std::stoull(stem.substr(p2 + 3));

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      TracePoint tp;
      if (std::sscanf(line.c_str(), "%ld,%lf,%lf", &tp.t, &tp.y, &tp.y_best) == 3)
        cell.record.trace.push_back(tp);
    }
    if (cell.record.trace.empty()) continue;
    cell.record.y_best = cell.record.trace.back().y_best;
    cell.record.evaluations_used = cell.record.trace.back().t;
    cell.y0 = cell.record.trace.front().y;
    try {
      const ProblemSpec ps = parse_problem(cell.problem);
      cell.y_star_analytic = make_benchmark(ps.family, ps.dim, ps.instance_seed).y_star;
    } catch (const std::exception&) {
      cell.y_star_analytic.reset();
    }
    result.runs.push_back(std::move(cell));
  }

  for (const auto& c : result.runs) {
    auto [it, inserted] = result.y_star_ref.try_emplace(c.problem, c.record.y_best);
    if (!inserted) it->second = std::min(it->second, c.record.y_best);
  }
  return result.summary_csv();
}

}  // namespace egl
