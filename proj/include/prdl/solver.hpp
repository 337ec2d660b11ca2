#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "prdl/problem.hpp"
#include "prdl/types.hpp"

namespace prdl {

using SupportMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct SolverConfig {
  double epsilon = 1e-5;
  int max_iters = 2000;
  bool debias = true;
  double secular_tol = 1e-9;
  std::uint64_t rng_seed = 0;
  // Scale of the random initial codes; negative selects 1/sqrt(P).
  double code_init_scale = -1.0;
  // Scale of the random initial signal (auxiliary formulation).
  double signal_init_scale = 1.0;
  // Recompute cached operator images from scratch every this many iterations.
  int cache_refresh = 100;
  bool record_trace = true;

  void validate() const;
};

struct Residuals {
  double d = 0.0;
  double z = 0.0;
  double x = 0.0;
};

struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;
  Residuals residual;
  double step = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct SolverReport {
  std::vector<TraceEntry> trace;
  CMatrix X;  // empty for the compact formulation
  CMatrix D;
  CMatrix Z;
  double objective = 0.0;
  Residuals residual;
  bool converged = false;
  int iterations = 0;
  double seconds = 0.0;
};

struct InitialPoint {
  CMatrix X;
  CMatrix D;
  CMatrix Z;
};

// Stopping thresholds M1 M2 sqrt(NP) eps, M1 M2 sqrt(PI) eps, M1 M2 sqrt(NI) eps.
Residuals stopping_thresholds(const ProblemInstance& inst, double epsilon);

// Frobenius norm of the minimum-norm subgradient block for D in the unit-ball
// product set. Columns with norm above 1 - boundary_tol are on the sphere.
double dictionary_residual(const CMatrix& D, const CMatrix& grad_d);

// Frobenius norm of the minimum-norm subgradient block for Z under weight * ||Z||_1.
// Entries outside `support` (when given) are fixed and excluded.
double code_residual(const CMatrix& Z, const CMatrix& grad_z, double weight,
                     const SupportMask* support = nullptr);

// Random D^0 with unit-norm columns and Z^0 i.i.d. complex Gaussian.
InitialPoint random_compact_start(const ProblemInstance& inst, const SolverConfig& cfg);
// Random X^0 and D^0, with Z^0 = pinv(D^0) X^0.
InitialPoint random_full_start(const ProblemInstance& inst, const SolverConfig& cfg);

CMatrix pseudo_inverse(const CMatrix& M);

// Project every column onto the unit ball.
void project_columns(CMatrix& D);

}  // namespace prdl
