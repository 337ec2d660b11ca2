#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "prdl/complexity.hpp"
#include "prdl/solver.hpp"

namespace prdl {

struct ExperimentConfig {
  int mixing_case = 1;
  Index N = 16;
  Index P = 8;
  Index I = 256;
  Index M1 = 64;
  std::vector<Index> L_grid{1};
  std::vector<double> density_grid;  // overrides L_grid when set: L = max(1, round(density P))
  double snr_db = 15.0;
  std::vector<SolverKind> solvers{SolverKind::CompactScaphase, SolverKind::Scaphase};
  int n_inits = 10;
  int n_trials = 50;
  // Sparsity weights are upper_bound * 0.75^exp; lists are paired by index and
  // a single value is broadcast.
  std::vector<int> lambda_exp{16};
  std::vector<int> rho_exp{16};
  std::vector<int> scprime_rho_exp{15};
  double mu_scale = 1.0;
  SolverConfig solver;
  std::string output = "results";
  std::uint64_t seed = 1;
  int threads = 1;
  bool write_traces = true;

  void validate() const;
  std::vector<Index> sparsity_levels() const;
  int exponent_count() const;
};

// Apply one `key = value` setting; unknown keys and bad values throw ParameterError.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
// Flat key-value file, '#' starts a comment.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);

struct TrialRow {
  int trial = 0;
  SolverKind solver = SolverKind::CompactScaphase;
  Index L = 0;
  int grid = 0;
  int exponent = 0;
  double reg = 0.0;  // lambda or rho
  double mu = 0.0;
  double objective = 0.0;
  int iterations = 0;
  int debias_iterations = 0;
  bool converged = false;
  bool debias_converged = false;
  int best_init = 0;
  double seconds = 0.0;  // kept run plus debiasing
  double mnse_d_db = 0.0;
  double mnse_z_db = 0.0;
  double f_measure = 0.0;
  std::string error;
};

struct ExperimentResult {
  std::vector<TrialRow> rows;
  std::vector<std::string> warnings;
  std::string summary_json;
};

struct Scenario;

// Instance copy with the solver's weights: lambda = lambda_max 0.75^exp for the
// compact solver; mu = mu_scale mu_default and rho = rho_max 0.75^exp otherwise.
ProblemInstance tuned_instance(SolverKind solver, const ProblemInstance& base, int exponent,
                               double mu_scale);

struct BestRun {
  SolverReport best;      // lowest final objective over the initializations
  SolverReport debiased;  // equals `best` when debiasing is off
  int best_init = 0;
  std::vector<double> init_objectives;
};

// n_inits seeded runs (init seed = mix_seed(trial_seed, 1000 + j)), keep the lowest
// objective, then debias when cfg.debias.
BestRun solve_best_of(SolverKind solver, const ProblemInstance& inst, const SolverConfig& cfg,
                      int n_inits, std::uint64_t trial_seed);

std::vector<std::string> validate_experiment(const ExperimentConfig& cfg);

// Runs every trial, writes trials.csv, trace files and summary.json into
// cfg.output when `write_files`, and returns the rows in deterministic order.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true,
                                std::ostream* log = nullptr);

// Aggregates recomputed from rows only; contains no timing.
std::string summarize(const ExperimentConfig& cfg, const std::vector<TrialRow>& rows);

std::string trials_csv_header();
std::string trials_csv_row(const TrialRow& r);

}  // namespace prdl
