#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prdl/complexity.hpp"
#include "prdl/harness.hpp"
#include "prdl/scenario.hpp"
#include "prdl/tuning.hpp"

using namespace prdl;

namespace {

int cmd_run(const std::string& path, const std::vector<std::string>& sets,
            const std::string& seed, int threads, const std::string& output, bool quiet) {
  ExperimentConfig cfg = load_config(path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("--set expects key=value, got '" + s + "'");
    }
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!seed.empty()) {
    apply_setting(cfg, "seed", seed);
  }
  if (threads > 0) {
    cfg.threads = threads;
  }
  if (!output.empty()) {
    cfg.output = output;
  }
  const ExperimentResult res = run_experiment(cfg, true, quiet ? nullptr : &std::cerr);
  if (quiet) {
    for (const auto& w : res.warnings) {
      std::cerr << "warning: " << w << '\n';
    }
  }
  std::cout << "wrote " << res.rows.size() << " rows to " << cfg.output << "/trials.csv\n";
  return 0;
}

void print_bounds(const Scenario& s, double mu_scale) {
  ProblemInstance inst = s.inst;
  inst.mu = mu_scale * mu_default(inst);
  const MixingOperator& op = inst.op();
  std::cout << std::setprecision(12);
  std::cout << "case            " << to_string(op.mixing_case()) << '\n';
  std::cout << "lambda_max      " << lambda_max(inst) << '\n';
  std::cout << "lambda_max_gen  " << lambda_max_general(inst) << '\n';
  std::cout << "mu              " << inst.mu << '\n';
  if (inst.mu > 0.0) {
    std::cout << "rho_max         " << rho_max(inst) << '\n';
    std::cout << "rho_max_gen     " << rho_max_general(inst) << '\n';
  } else {
    std::cout << "rho_max         undefined (mu = 0)\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase retrieval with dictionary learning"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment from a config file");
  std::string config_path, seed, output;
  std::vector<std::string> sets;
  int threads = 0;
  bool quiet = false;
  run->add_option("config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", sets, "Override a config key (key=value)");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--threads", threads, "Worker threads");
  run->add_option("--output", output, "Output directory");
  run->add_flag("-q,--quiet", quiet, "Suppress per-trial log");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic scenario as JSON");
  ScenarioParams gp;
  std::string gen_out = "scenario.json";
  std::string snr = "15";
  gen->add_option("case", gp.mixing_case, "Mixing case 1, 2 or 3")->required();
  gen->add_option("--N", gp.N, "Signal rows");
  gen->add_option("--P", gp.P, "Dictionary size");
  gen->add_option("--I", gp.I, "Snapshots");
  gen->add_option("--M1", gp.M1, "Spatial measurements");
  gen->add_option("--L", gp.L, "Nonzeros per code column");
  gen->add_option("--snr", snr, "SNR in dB or 'inf'");
  gen->add_option("--seed", gp.seed, "Seed");
  gen->add_flag("--normalize", gp.normalize_dictionary, "Unit-norm dictionary columns");
  gen->add_option("-o,--output", gen_out, "Output file");

  auto* bounds = app.add_subcommand("bounds", "Print lambda_max, rho_max and mu for a scenario");
  std::string bounds_path;
  double mu_scale = 1.0;
  bounds->add_option("scenario", bounds_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  bounds->add_option("--mu-scale", mu_scale, "Multiplier on sigma_min,nz(F)^2");

  auto* cx = app.add_subcommand("complexity", "Per-iteration flop estimate for a solver");
  std::string cx_solver, cx_path;
  cx->add_option("solver", cx_solver, "compact-scaphase | scaphase | sc-prime")->required();
  cx->add_option("scenario", cx_path, "Scenario JSON")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return cmd_run(config_path, sets, seed, threads, output, quiet);
    }
    if (*gen) {
      gp.snr_db = snr == "inf" ? std::numeric_limits<double>::infinity() : std::stod(snr);
      const Scenario s = generate_scenario(gp);
      save_scenario(s, gen_out);
      std::cout << "wrote " << gen_out << '\n';
      return 0;
    }
    if (*bounds) {
      print_bounds(load_scenario(bounds_path), mu_scale);
      return 0;
    }
    if (*cx) {
      const SolverKind kind = parse_solver(cx_solver);
      const Scenario s = load_scenario(cx_path);
      const ComplexityEstimate e = estimate_complexity(kind, s.inst.op(), s.inst.atoms());
      std::cout << std::setprecision(15);
      std::cout << "solver        " << to_string(kind) << '\n';
      std::cout << "c(F) range    [" << e.cF_lower << ", " << e.cF_upper << "]\n";
      auto row = [&](const char* name, const CostTerm& t) {
        std::cout << name << t.cf << " c(F) + " << t.flops << "  in [" << t.at(e.cF_lower)
                  << ", " << t.at(e.cF_upper) << "]\n";
      };
      row("gradient      ", e.gradient);
      row("hessian       ", e.hessian);
      row("line search   ", e.line_search);
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
