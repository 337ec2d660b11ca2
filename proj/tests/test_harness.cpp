#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prdl/harness.hpp"
#include "prdl/random.hpp"
#include "prdl/scenario.hpp"
#include "prdl/tuning.hpp"
#include "support.hpp"

using namespace prdl;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.mixing_case = 1;
  cfg.N = 4;
  cfg.P = 3;
  cfg.I = 12;
  cfg.M1 = 12;
  cfg.L_grid = {1, 2};
  cfg.snr_db = 20.0;
  cfg.solvers = {SolverKind::CompactScaphase, SolverKind::Scaphase, SolverKind::Scprime};
  cfg.n_inits = 2;
  cfg.n_trials = 2;
  cfg.lambda_exp = {6, 8};
  cfg.rho_exp = {6, 8};
  cfg.scprime_rho_exp = {7};
  cfg.solver.max_iters = 60;
  cfg.solver.epsilon = 1e-6;
  cfg.write_traces = false;
  return cfg;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config file parsing") {
  std::istringstream in(
      "# comment line\n"
      "case = 2\n"
      "N=8   # trailing comment\n"
      "P = 4\n"
      "I = 32\n"
      "M1 = 16\n"
      "L = 1, 2, 3\n"
      "snr_db = 12.5\n"
      "solvers = scaphase, sc-prime\n"
      "n_inits = 3\n"
      "n_trials = 5\n"
      "lambda_exp = 10, 12, 14\n"
      "rho_exp = 11\n"
      "mu_scale = 0.5\n"
      "epsilon = 1e-7\n"
      "max_iters = 77\n"
      "debias = false\n"
      "output = somewhere\n"
      "seed = 42\n"
      "threads = 2\n"
      "write_traces = no\n"
      "\n");
  const ExperimentConfig cfg = parse_config(in);
  CHECK(cfg.mixing_case == 2);
  CHECK(cfg.N == 8);
  CHECK(cfg.P == 4);
  CHECK(cfg.I == 32);
  CHECK(cfg.M1 == 16);
  CHECK(cfg.L_grid == std::vector<Index>{1, 2, 3});
  CHECK(cfg.snr_db == 12.5);
  REQUIRE(cfg.solvers.size() == 2);
  CHECK(cfg.solvers[0] == SolverKind::Scaphase);
  CHECK(cfg.solvers[1] == SolverKind::Scprime);
  CHECK(cfg.n_inits == 3);
  CHECK(cfg.n_trials == 5);
  CHECK(cfg.lambda_exp == std::vector<int>{10, 12, 14});
  CHECK(cfg.rho_exp == std::vector<int>{11});
  CHECK(cfg.exponent_count() == 3);
  CHECK(cfg.mu_scale == 0.5);
  CHECK(cfg.solver.epsilon == 1e-7);
  CHECK(cfg.solver.max_iters == 77);
  CHECK_FALSE(cfg.solver.debias);
  CHECK(cfg.output == "somewhere");
  CHECK(cfg.seed == 42);
  CHECK(cfg.threads == 2);
  CHECK_FALSE(cfg.write_traces);
}

TEST_CASE("config errors name the line") {
  {
    std::istringstream in("N = 8\nbogus = 1\n");
    try {
      parse_config(in);
      FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 2") != std::string::npos);
      CHECK(msg.find("bogus") != std::string::npos);
    }
  }
  {
    std::istringstream in("N = eight\n");
    CHECK_THROWS_AS(parse_config(in), ParameterError);
  }
  {
    std::istringstream in("N 8\n");
    CHECK_THROWS_AS(parse_config(in), ParameterError);
  }
  {
    std::istringstream in("solvers = scaphase, simplex\n");
    CHECK_THROWS_AS(parse_config(in), ParameterError);
  }
  CHECK_THROWS(load_config("/nonexistent/dir/config.txt"));
}

TEST_CASE("density grid maps to sparsity levels") {
  ExperimentConfig cfg;
  cfg.P = 8;
  cfg.density_grid = {0.01, 0.25, 0.5, 1.0};
  CHECK(cfg.sparsity_levels() == std::vector<Index>{1, 2, 4, 8});
  apply_setting(cfg, "L", "3");
  CHECK(cfg.sparsity_levels() == std::vector<Index>{3});
}

TEST_CASE("experiment validation") {
  ExperimentConfig cfg = tiny_config();
  CHECK(validate_experiment(cfg).empty());

  ExperimentConfig bad = cfg;
  bad.solvers.clear();
  CHECK_THROWS_AS(validate_experiment(bad), ParameterError);
  bad = cfg;
  bad.n_inits = 0;
  CHECK_THROWS_AS(validate_experiment(bad), ParameterError);
  bad = cfg;
  bad.n_trials = 0;
  CHECK_THROWS_AS(validate_experiment(bad), ParameterError);
  bad = cfg;
  bad.threads = 0;
  CHECK_THROWS_AS(validate_experiment(bad), ParameterError);
  bad = cfg;
  bad.rho_exp = {1, 2, 3};
  CHECK_THROWS_AS(validate_experiment(bad), ParameterError);
  bad = cfg;
  bad.mu_scale = 0.0;
  CHECK_THROWS_AS(validate_experiment(bad), ParameterError);
  bad = cfg;
  bad.L_grid = {cfg.P + 1};
  CHECK_THROWS_AS(validate_experiment(bad), ParameterError);

  ExperimentConfig c3 = cfg;
  c3.mixing_case = 3;
  CHECK(validate_experiment(c3).size() == 1);
  c3.solvers = {SolverKind::Scaphase};
  CHECK(validate_experiment(c3).empty());
}

TEST_CASE("tuned_instance weights") {
  ScenarioParams sp;
  sp.N = 4;
  sp.P = 3;
  sp.I = 12;
  sp.M1 = 12;
  sp.seed = 5;
  const Scenario s = generate_scenario(sp);

  const ProblemInstance c = tuned_instance(SolverKind::CompactScaphase, s.inst, 3, 2.0);
  CHECK(testing::rel_err(c.lambda, lambda_max(s.inst) * 0.75 * 0.75 * 0.75) < 1e-12);
  CHECK(c.mu == 0.0);
  CHECK(c.rho == 0.0);

  for (SolverKind k : {SolverKind::Scaphase, SolverKind::Scprime}) {
    const ProblemInstance f = tuned_instance(k, s.inst, 2, 2.0);
    CHECK(f.lambda == 0.0);
    CHECK(testing::rel_err(f.mu, 2.0 * mu_default(s.inst)) < 1e-12);
    // rho_max depends on mu, so it is evaluated on the instance carrying mu.
    ProblemInstance with_mu = s.inst;
    with_mu.mu = f.mu;
    with_mu.rho = 0.0;
    with_mu.lambda = 0.0;
    CHECK(testing::rel_err(f.rho, rho_max(with_mu) * 0.5625) < 1e-12);
  }
}

TEST_CASE("solve_best_of keeps the lowest objective") {
  ScenarioParams sp;
  sp.N = 4;
  sp.P = 3;
  sp.I = 12;
  sp.M1 = 12;
  sp.seed = 11;
  const Scenario s = generate_scenario(sp);
  SolverConfig sc;
  sc.max_iters = 40;
  sc.record_trace = false;
  for (SolverKind k : {SolverKind::CompactScaphase, SolverKind::Scaphase, SolverKind::Scprime}) {
    const ProblemInstance inst = tuned_instance(k, s.inst, 8, 1.0);
    sc.debias = false;
    const BestRun br = solve_best_of(k, inst, sc, 4, 99);
    REQUIRE(br.init_objectives.size() == 4);
    const double lo = *std::min_element(br.init_objectives.begin(), br.init_objectives.end());
    CHECK(br.best.objective == lo);
    CHECK(br.init_objectives[static_cast<size_t>(br.best_init)] == lo);
    CHECK(br.debiased.objective == br.best.objective);

    // Same seeds give the same runs.
    const BestRun again = solve_best_of(k, inst, sc, 4, 99);
    CHECK(again.init_objectives == br.init_objectives);

    // Debiasing never changes the estimate's support.
    sc.debias = true;
    const BestRun db = solve_best_of(k, inst, sc, 4, 99);
    CHECK(db.best.objective == br.best.objective);
    const auto sup = br.best.Z.cwiseAbs().array() > 0.0;
    CHECK(((db.debiased.Z.cwiseAbs().array() > 0.0) && !sup).count() == 0);
  }
}

TEST_CASE("run_experiment layout and summary") {
  const ExperimentConfig cfg = tiny_config();
  const ExperimentResult r = run_experiment(cfg, false);
  const size_t S = cfg.solvers.size();
  const size_t tasks = static_cast<size_t>(cfg.n_trials) * cfg.sparsity_levels().size() *
                       static_cast<size_t>(cfg.exponent_count());
  REQUIRE(r.rows.size() == tasks * S);
  for (size_t i = 0; i < r.rows.size(); ++i) {
    const TrialRow& row = r.rows[i];
    CHECK(row.error.empty());
    CHECK(row.solver == cfg.solvers[i % S]);
    const size_t task = i / S;
    CHECK(row.trial == static_cast<int>(task / 4));
    CHECK(row.grid == static_cast<int>(task % 4));
    CHECK(row.L == cfg.sparsity_levels()[(task % 4) / 2]);
    const int k = row.grid % 2;
    const int expect = row.solver == SolverKind::CompactScaphase ? cfg.lambda_exp[k]
                       : row.solver == SolverKind::Scaphase      ? cfg.rho_exp[k]
                                                                 : cfg.scprime_rho_exp[0];
    CHECK(row.exponent == expect);
    CHECK(row.f_measure >= 0.0);
    CHECK(row.f_measure <= 1.0);
    CHECK(row.iterations >= 1);
    CHECK(row.iterations <= cfg.solver.max_iters);
    CHECK(row.best_init >= 0);
    CHECK(row.best_init < cfg.n_inits);
  }
  CHECK(summarize(cfg, r.rows) == r.summary_json);

  const auto j = nlohmann::json::parse(r.summary_json);
  CHECK(j["groups"].size() == S * 4);
  for (const auto& g : j["groups"]) {
    CHECK(g["trials"] == cfg.n_trials);
    CHECK(g["errors"] == 0);
  }
  CHECK(j["config"]["N"] == cfg.N);
  CHECK(r.summary_json.find("seconds") == std::string::npos);
}

TEST_CASE("summary medians from rows") {
  ExperimentConfig cfg;
  cfg.solvers = {SolverKind::Scaphase};
  cfg.L_grid = {2};
  cfg.rho_exp = {5};
  std::vector<TrialRow> rows;
  const double f[] = {0.2, 0.9, 0.5, 0.7};
  for (int t = 0; t < 4; ++t) {
    TrialRow row;
    row.trial = t;
    row.solver = SolverKind::Scaphase;
    row.L = 2;
    row.f_measure = f[t];
    row.iterations = 10 * (t + 1);
    row.debias_iterations = 1;
    row.converged = t != 0;
    rows.push_back(row);
  }
  TrialRow broken;
  broken.solver = SolverKind::Scaphase;
  broken.error = "boom";
  rows.push_back(broken);
  const auto j = nlohmann::json::parse(summarize(cfg, rows));
  REQUIRE(j["groups"].size() == 1);
  const auto& g = j["groups"][0];
  CHECK(g["trials"] == 5);
  CHECK(g["errors"] == 1);
  CHECK(g["median_f_measure"].get<double>() == doctest::Approx(0.6));
  CHECK(g["median_total_iterations"].get<double>() == doctest::Approx(26.0));
  CHECK(g["converged_fraction"].get<double>() == doctest::Approx(0.75));
}

TEST_CASE("run_experiment is deterministic across thread counts and writes files") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = tiny_config();
  cfg.solvers = {SolverKind::CompactScaphase, SolverKind::Scaphase};
  cfg.L_grid = {1};
  cfg.n_trials = 3;
  cfg.write_traces = true;
  const fs::path base = fs::temp_directory_path() / "prdl_test_harness";
  fs::remove_all(base);
  cfg.output = (base / "a").string();
  cfg.threads = 1;
  const ExperimentResult a = run_experiment(cfg, true);
  cfg.output = (base / "b").string();
  cfg.threads = 3;
  const ExperimentResult b = run_experiment(cfg, true);

  CHECK(a.summary_json == b.summary_json);
  CHECK(read_file(base / "a" / "summary.json") == read_file(base / "b" / "summary.json"));
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].objective == b.rows[i].objective);
    CHECK(a.rows[i].iterations == b.rows[i].iterations);
  }

  std::ifstream csv(base / "a" / "trials.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == trials_csv_header());
  int n = 0;
  while (std::getline(csv, line)) {
    ++n;
  }
  CHECK(n == static_cast<int>(a.rows.size()));

  const fs::path trace = base / "a" / "trace_2_scaphase_1.csv";
  CHECK(fs::exists(trace));
  CHECK(fs::exists(base / "a" / "trace_0_compact-scaphase_0.csv"));
  fs::remove_all(base);
}

TEST_CASE("trials csv row format") {
  TrialRow r;
  r.trial = 3;
  r.solver = SolverKind::Scprime;
  r.L = 2;
  r.grid = 1;
  r.exponent = 15;
  r.iterations = 10;
  r.debias_iterations = 4;
  r.converged = true;
  r.error = "";
  const std::string row = trials_csv_row(r);
  CHECK(row.rfind("3,sc-prime,2,1,15,", 0) == 0);
  const auto commas = std::count(row.begin(), row.end(), ',');
  const auto header = trials_csv_header();
  CHECK(commas == std::count(header.begin(), header.end(), ','));
  CHECK(row.find(",10,4,14,1,0,") != std::string::npos);
}

TEST_CASE("complexity estimates") {
  ComplexityDims d{64, 32, 1024, 256, 1024};
  const auto c = estimate_complexity(SolverKind::CompactScaphase, d, true);
  CHECK(c.hessian.flops == 2.0 * 256 * 64 * 32 + 2.0 * 1024 * 32 * 1024);
  CHECK(c.hessian.flops == 68157440.0);
  CHECK(c.cF_lower == 2.0 * 64 * 1024 * 1024);
  CHECK(c.cF_upper == 2.0 * 256 * 1024 * 64 * 1024);

  const auto s = estimate_complexity(SolverKind::Scaphase, d, true);
  CHECK(s.hessian.flops == 2.0 * 64 * 32 + 2.0 * 32 * 1024);
  CHECK(s.hessian.cf == 0.0);
  CHECK(s.gradient.cf == 1.0);
  CHECK(s.gradient.flops == 4.0 * 64 * 32 * 1024);

  const auto p = estimate_complexity(SolverKind::Scprime, d, true);
  CHECK(p.gradient.cf == 2.0);
  CHECK(p.gradient.flops == 6.0 * 64 * 32 * 1024);
  CHECK(p.line_search.at(1e9) == 0.0);

  CHECK(parse_solver("compact-scaphase") == SolverKind::CompactScaphase);
  CHECK(parse_solver("scaphase") == SolverKind::Scaphase);
  CHECK(parse_solver("sc-prime") == SolverKind::Scprime);
  CHECK_THROWS_AS(parse_solver("simplex"), ParameterError);
  for (SolverKind k : {SolverKind::CompactScaphase, SolverKind::Scaphase, SolverKind::Scprime}) {
    CHECK(parse_solver(to_string(k)) == k);
  }
}
