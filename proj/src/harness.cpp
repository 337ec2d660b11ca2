#include "prdl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "prdl/compact_scaphase.hpp"
#include "prdl/evaluate.hpp"
#include "prdl/random.hpp"
#include "prdl/scaphase.hpp"
#include "prdl/scenario.hpp"
#include "prdl/scprime.hpp"
#include "prdl/tuning.hpp"

namespace prdl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T x{};
  is >> x;
  if (!is || !(is >> std::ws).eof()) {
    throw ParameterError("bad value '" + v + "' for key '" + key + "'");
  }
  return x;
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  return parse_number<double>(key, v);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no" || v == "off") {
    return false;
  }
  throw ParameterError("bad boolean '" + v + "' for key '" + key + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) {
    out.push_back(parse_number<T>(key, item));
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SolverReport run_solver(SolverKind kind, const ProblemInstance& inst, const SolverConfig& cfg,
                        const InitialPoint& init) {
  switch (kind) {
    case SolverKind::CompactScaphase:
      return CompactScaphase(inst, cfg).run(init);
    case SolverKind::Scaphase:
      return Scaphase(inst, cfg).run(init);
    case SolverKind::Scprime:
      return Scprime(inst, cfg).run(init);
  }
  throw ParameterError("unknown solver");
}

SolverReport debias_solver(SolverKind kind, const ProblemInstance& inst, const SolverConfig& cfg,
                           const SolverReport& rep) {
  switch (kind) {
    case SolverKind::CompactScaphase:
      return CompactScaphase(inst, cfg).debias(rep.D, rep.Z);
    case SolverKind::Scaphase:
      return Scaphase(inst, cfg).debias(rep.X, rep.D, rep.Z);
    case SolverKind::Scprime:
      return Scprime(inst, cfg).debias(rep.X, rep.D, rep.Z);
  }
  throw ParameterError("unknown solver");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

void write_trace(const std::filesystem::path& path, const SolverReport& main,
                 const SolverReport& debiased, bool has_debias) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write trace file '" + path.string() + "'");
  }
  out << "phase,iteration,objective,r_d,r_z,r_x,step,seconds\n";
  auto dump = [&](const char* phase, const SolverReport& r) {
    for (const auto& e : r.trace) {
      out << phase << ',' << e.iteration << ',' << fmt(e.objective) << ',' << fmt(e.residual.d)
          << ',' << fmt(e.residual.z) << ',' << fmt(e.residual.x) << ',' << fmt(e.step) << ','
          << fmt(e.seconds) << '\n';
    }
  };
  dump("main", main);
  if (has_debias) {
    dump("debias", debiased);
  }
}

struct Task {
  int trial;
  Index L;
  int grid_index;  // index into the combined (L, exponent) grid
  int exp_index;
};

}  // namespace

void ExperimentConfig::validate() const {
  (void)validate_experiment(*this);
}

std::vector<Index> ExperimentConfig::sparsity_levels() const {
  if (density_grid.empty()) {
    return L_grid;
  }
  std::vector<Index> out;
  for (double d : density_grid) {
    out.push_back(std::max<Index>(1, static_cast<Index>(std::llround(d * static_cast<double>(P)))));
  }
  return out;
}

int ExperimentConfig::exponent_count() const {
  size_t n = 1;
  for (const auto* v : {&lambda_exp, &rho_exp, &scprime_rho_exp}) {
    n = std::max(n, v->size());
  }
  return static_cast<int>(n);
}

void apply_setting(ExperimentConfig& cfg, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  if (key == "case") {
    cfg.mixing_case = parse_number<int>(key, v);
  } else if (key == "N") {
    cfg.N = parse_number<Index>(key, v);
  } else if (key == "P") {
    cfg.P = parse_number<Index>(key, v);
  } else if (key == "I") {
    cfg.I = parse_number<Index>(key, v);
  } else if (key == "M1") {
    cfg.M1 = parse_number<Index>(key, v);
  } else if (key == "L") {
    cfg.L_grid = parse_list<Index>(key, v);
    cfg.density_grid.clear();
  } else if (key == "density") {
    cfg.density_grid = parse_list<double>(key, v);
  } else if (key == "snr_db") {
    cfg.snr_db = parse_double(key, v);
  } else if (key == "solvers") {
    cfg.solvers.clear();
    for (const auto& s : split_list(v)) {
      cfg.solvers.push_back(parse_solver(s));
    }
  } else if (key == "n_inits") {
    cfg.n_inits = parse_number<int>(key, v);
  } else if (key == "n_trials") {
    cfg.n_trials = parse_number<int>(key, v);
  } else if (key == "lambda_exp") {
    cfg.lambda_exp = parse_list<int>(key, v);
  } else if (key == "rho_exp") {
    cfg.rho_exp = parse_list<int>(key, v);
  } else if (key == "scprime_rho_exp") {
    cfg.scprime_rho_exp = parse_list<int>(key, v);
  } else if (key == "mu_scale") {
    cfg.mu_scale = parse_double(key, v);
  } else if (key == "epsilon") {
    cfg.solver.epsilon = parse_double(key, v);
  } else if (key == "max_iters") {
    cfg.solver.max_iters = parse_number<int>(key, v);
  } else if (key == "debias") {
    cfg.solver.debias = parse_bool(key, v);
  } else if (key == "secular_tol") {
    cfg.solver.secular_tol = parse_double(key, v);
  } else if (key == "code_init_scale") {
    cfg.solver.code_init_scale = parse_double(key, v);
  } else if (key == "signal_init_scale") {
    cfg.solver.signal_init_scale = parse_double(key, v);
  } else if (key == "output") {
    cfg.output = v;
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, v);
  } else if (key == "threads") {
    cfg.threads = parse_number<int>(key, v);
  } else if (key == "write_traces") {
    cfg.write_traces = parse_bool(key, v);
  } else {
    throw ParameterError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ParameterError& e) {
      throw ParameterError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config '" + path + "'");
  }
  return parse_config(in);
}

std::vector<std::string> validate_experiment(const ExperimentConfig& cfg) {
  if (cfg.solvers.empty()) {
    throw ParameterError("solver list is empty");
  }
  if (cfg.n_inits < 1) {
    throw ParameterError("n_inits must be at least 1");
  }
  if (cfg.n_trials < 1) {
    throw ParameterError("n_trials must be at least 1");
  }
  if (cfg.threads < 1) {
    throw ParameterError("threads must be at least 1");
  }
  if (cfg.sparsity_levels().empty()) {
    throw ParameterError("sparsity grid is empty");
  }
  const int g = cfg.exponent_count();
  for (const auto* v : {&cfg.lambda_exp, &cfg.rho_exp, &cfg.scprime_rho_exp}) {
    if (v->empty() || (v->size() != 1 && static_cast<int>(v->size()) != g)) {
      throw ParameterError("exponent lists must be nonempty with equal lengths or length 1");
    }
  }
  if (!(cfg.mu_scale > 0.0)) {
    throw ParameterError("mu_scale must be positive");
  }
  cfg.solver.validate();
  for (Index L : cfg.sparsity_levels()) {
    ScenarioParams p;
    p.mixing_case = cfg.mixing_case;
    p.N = cfg.N;
    p.P = cfg.P;
    p.I = cfg.I;
    p.M1 = cfg.M1;
    p.L = L;
    p.snr_db = cfg.snr_db;
    p.validate();
  }
  std::vector<std::string> warnings;
  const bool compact = std::find(cfg.solvers.begin(), cfg.solvers.end(),
                                 SolverKind::CompactScaphase) != cfg.solvers.end();
  if (compact && cfg.mixing_case == 3) {
    warnings.push_back(
        "compact-scaphase on a case-3 operator (K = I components): the partial-Hessian step "
        "costs O(M1 M2 N P I) per iteration and dominates the run time");
  }
  return warnings;
}

ProblemInstance tuned_instance(SolverKind solver, const ProblemInstance& base, int exponent,
                               double mu_scale) {
  ProblemInstance inst = base;
  inst.lambda = 0.0;
  inst.mu = 0.0;
  inst.rho = 0.0;
  if (solver == SolverKind::CompactScaphase) {
    inst.lambda = grid_value(lambda_max(inst), exponent);
  } else {
    inst.mu = mu_scale * mu_default(inst);
    inst.rho = grid_value(rho_max(inst), exponent);
  }
  return inst;
}

BestRun solve_best_of(SolverKind solver, const ProblemInstance& inst, const SolverConfig& cfg,
                      int n_inits, std::uint64_t trial_seed) {
  BestRun out;
  bool have = false;
  for (int j = 0; j < n_inits; ++j) {
    SolverConfig c = cfg;
    c.rng_seed = mix_seed(trial_seed, 1000 + static_cast<std::uint64_t>(j));
    const InitialPoint init = solver == SolverKind::CompactScaphase
                                  ? random_compact_start(inst, c)
                                  : random_full_start(inst, c);
    SolverReport rep = run_solver(solver, inst, c, init);
    out.init_objectives.push_back(rep.objective);
    if (!have || rep.objective < out.best.objective) {
      out.best = std::move(rep);
      out.best_init = j;
      have = true;
    }
  }
  out.debiased = cfg.debias ? debias_solver(solver, inst, cfg, out.best) : out.best;
  return out;
}

std::string trials_csv_header() {
  return "trial,solver,L,grid,exponent,reg,mu,objective,iterations,debias_iterations,"
         "total_iterations,converged,debias_converged,best_init,seconds,mnse_d_db,mnse_z_db,"
         "f_measure,error";
}

std::string trials_csv_row(const TrialRow& r) {
  std::ostringstream os;
  os << r.trial << ',' << to_string(r.solver) << ',' << r.L << ',' << r.grid << ','
     << r.exponent << ',' << fmt(r.reg) << ',' << fmt(r.mu) << ',' << fmt(r.objective) << ','
     << r.iterations << ',' << r.debias_iterations << ','
     << (r.iterations + r.debias_iterations) << ',' << r.converged << ',' << r.debias_converged
     << ',' << r.best_init << ',' << fmt(r.seconds) << ',' << fmt(r.mnse_d_db) << ','
     << fmt(r.mnse_z_db) << ',' << fmt(r.f_measure) << ',' << '"' << r.error << '"';
  return os.str();
}

std::string summarize(const ExperimentConfig& cfg, const std::vector<TrialRow>& rows) {
  using nlohmann::json;
  json j;
  j["config"] = {{"case", cfg.mixing_case},
                 {"N", cfg.N},
                 {"P", cfg.P},
                 {"I", cfg.I},
                 {"M1", cfg.M1},
                 {"L", cfg.sparsity_levels()},
                 {"snr_db", std::isfinite(cfg.snr_db) ? json(cfg.snr_db) : json("inf")},
                 {"n_inits", cfg.n_inits},
                 {"n_trials", cfg.n_trials},
                 {"lambda_exp", cfg.lambda_exp},
                 {"rho_exp", cfg.rho_exp},
                 {"scprime_rho_exp", cfg.scprime_rho_exp},
                 {"mu_scale", cfg.mu_scale},
                 {"epsilon", cfg.solver.epsilon},
                 {"max_iters", cfg.solver.max_iters},
                 {"debias", cfg.solver.debias},
                 {"seed", cfg.seed}};
  json groups = json::array();
  const auto levels = cfg.sparsity_levels();
  const int G = cfg.exponent_count();
  for (SolverKind s : cfg.solvers) {
    for (size_t li = 0; li < levels.size(); ++li) {
      for (int k = 0; k < G; ++k) {
        const int grid = static_cast<int>(li) * G + k;
        std::vector<double> md, mz, fm, it, obj;
        int conv = 0, errors = 0, count = 0;
        for (const auto& r : rows) {
          if (r.solver != s || r.grid != grid) {
            continue;
          }
          ++count;
          if (!r.error.empty()) {
            ++errors;
            continue;
          }
          md.push_back(r.mnse_d_db);
          mz.push_back(r.mnse_z_db);
          fm.push_back(r.f_measure);
          it.push_back(r.iterations + r.debias_iterations);
          obj.push_back(r.objective);
          conv += r.converged;
        }
        const double n_ok = static_cast<double>(count - errors);
        groups.push_back({{"solver", to_string(s)},
                          {"L", levels[li]},
                          {"grid", grid},
                          {"trials", count},
                          {"errors", errors},
                          {"converged_fraction", n_ok > 0 ? conv / n_ok : 0.0},
                          {"median_mnse_d_db", median(md)},
                          {"median_mnse_z_db", median(mz)},
                          {"median_f_measure", median(fm)},
                          {"median_total_iterations", median(it)},
                          {"median_objective", median(obj)}});
      }
    }
  }
  j["groups"] = std::move(groups);
  return j.dump(2);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files,
                                std::ostream* log) {
  ExperimentResult result;
  result.warnings = validate_experiment(cfg);
  if (log) {
    for (const auto& w : result.warnings) {
      *log << "warning: " << w << '\n';
    }
  }
  namespace fs = std::filesystem;
  const fs::path outdir(cfg.output);
  if (write_files) {
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec) {
      throw std::runtime_error("cannot create output directory '" + outdir.string() +
                               "': " + ec.message());
    }
  }

  const auto levels = cfg.sparsity_levels();
  const int G = cfg.exponent_count();
  std::vector<Task> tasks;
  for (int t = 0; t < cfg.n_trials; ++t) {
    for (size_t li = 0; li < levels.size(); ++li) {
      for (int k = 0; k < G; ++k) {
        tasks.push_back({t, levels[li], static_cast<int>(li) * G + k, k});
      }
    }
  }
  const size_t S = cfg.solvers.size();
  std::vector<TrialRow> rows(tasks.size() * S);
  std::mutex io_mutex;
  auto pick = [](const std::vector<int>& v, int k) {
    return v.size() == 1 ? v[0] : v[static_cast<size_t>(k)];
  };

  auto work = [&](size_t ti) {
    const Task& task = tasks[ti];
    const std::uint64_t trial_seed =
        mix_seed(cfg.seed, static_cast<std::uint64_t>(task.trial), static_cast<std::uint64_t>(task.L));
    ScenarioParams sp;
    sp.mixing_case = cfg.mixing_case;
    sp.N = cfg.N;
    sp.P = cfg.P;
    sp.I = cfg.I;
    sp.M1 = cfg.M1;
    sp.L = task.L;
    sp.snr_db = cfg.snr_db;
    sp.seed = trial_seed;
    const Scenario scen = generate_scenario(sp);
    EvalOptions eo;
    eo.columnwise_phase = scen.inst.op().snapshots_independent();
    for (size_t si = 0; si < S; ++si) {
      const SolverKind kind = cfg.solvers[si];
      TrialRow& row = rows[ti * S + si];
      row.trial = task.trial;
      row.solver = kind;
      row.L = task.L;
      row.grid = task.grid_index;
      row.exponent = pick(kind == SolverKind::CompactScaphase ? cfg.lambda_exp
                          : kind == SolverKind::Scaphase      ? cfg.rho_exp
                                                              : cfg.scprime_rho_exp,
                          task.exp_index);
      try {
        const ProblemInstance inst = tuned_instance(kind, scen.inst, row.exponent, cfg.mu_scale);
        row.reg = kind == SolverKind::CompactScaphase ? inst.lambda : inst.rho;
        row.mu = inst.mu;
        SolverConfig sc = cfg.solver;
        sc.record_trace = cfg.write_traces;
        const BestRun br = solve_best_of(kind, inst, sc, cfg.n_inits, trial_seed);
        row.objective = br.best.objective;
        row.iterations = br.best.iterations;
        row.converged = br.best.converged;
        row.best_init = br.best_init;
        row.debias_iterations = cfg.solver.debias ? br.debiased.iterations : 0;
        row.debias_converged = br.debiased.converged;
        row.seconds = br.best.seconds + (cfg.solver.debias ? br.debiased.seconds : 0.0);
        const Metrics m = evaluate_estimate(br.debiased.D, br.debiased.Z, scen.D_true,
                                            scen.Z_true, eo);
        row.mnse_d_db = to_db(m.mnse_d);
        row.mnse_z_db = to_db(m.mnse_z);
        row.f_measure = m.f_measure;
        if (write_files && cfg.write_traces) {
          const fs::path trace = outdir / ("trace_" + std::to_string(task.trial) + "_" +
                                           to_string(kind) + "_" +
                                           std::to_string(task.grid_index) + ".csv");
          std::lock_guard<std::mutex> lock(io_mutex);
          write_trace(trace, br.best, br.debiased, cfg.solver.debias);
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      if (log) {
        std::lock_guard<std::mutex> lock(io_mutex);
        *log << "trial " << task.trial << " L=" << task.L << " grid=" << task.grid_index << ' '
             << to_string(kind) << ": " << (row.error.empty() ? "ok" : row.error)
             << " iters=" << row.iterations << '+' << row.debias_iterations
             << " F=" << row.f_measure << " MNSE(D)=" << row.mnse_d_db << " dB\n";
      }
    }
  };

  const int nthreads = std::min<int>(cfg.threads, static_cast<int>(tasks.size()));
  if (nthreads <= 1) {
    for (size_t i = 0; i < tasks.size(); ++i) {
      work(i);
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < tasks.size(); i = next++) {
          work(i);
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
  }

  result.rows = std::move(rows);
  result.summary_json = summarize(cfg, result.rows);
  if (write_files) {
    const fs::path csv = outdir / "trials.csv";
    std::ofstream out(csv);
    if (!out) {
      throw std::runtime_error("cannot write '" + csv.string() + "'");
    }
    out << trials_csv_header() << '\n';
    for (const auto& r : result.rows) {
      out << trials_csv_row(r) << '\n';
    }
    const fs::path js = outdir / "summary.json";
    std::ofstream sj(js);
    if (!sj) {
      throw std::runtime_error("cannot write '" + js.string() + "'");
    }
    sj << result.summary_json << '\n';
  }
  return result;
}

}  // namespace prdl
