#pragma once

#include <vector>

#include "prdl/types.hpp"

namespace prdl {

struct PhaseAlignment {
  CMatrix aligned;
  RVector phases;  // one entry (global) or one per column
};

// Rotate `est` by exp(i phi) to best match `truth`; phi = -arg(tr(truth^H est)),
// or per column when `columnwise`. A zero inner product gives phi = 0.
PhaseAlignment phase_align(const CMatrix& est, const CMatrix& truth, bool columnwise);

// Apply phases from phase_align to the columns of M (one global or one per column).
CMatrix apply_phases(const CMatrix& M, const RVector& phases);

// perm[q] = estimated column assigned to true column q. Greedy by normalized
// cross-correlation (largest first) unless `optimal`, which maximizes the total.
std::vector<Index> match_permutation(const CMatrix& D_est, const CMatrix& D_true,
                                     bool optimal = false);

CMatrix permute_columns(const CMatrix& D, const std::vector<Index>& perm);
CMatrix permute_rows(const CMatrix& Z, const std::vector<Index>& perm);

// min over per-column complex scales, normalized by ||D_true||_F^2.
double mnse_d(const CMatrix& D_est, const CMatrix& D_true);
// Same on rows.
double mnse_z(const CMatrix& Z_est, const CMatrix& Z_true);

// 2TP / (2TP + FP + FN) with |z| > threshold as the support test.
double f_measure(const CMatrix& Z_est, const CMatrix& Z_true, double threshold = 0.0);

double to_db(double ratio);

struct Metrics {
  double mnse_d = 0.0;
  double mnse_z = 0.0;
  double f_measure = 0.0;
  std::vector<Index> perm;
  RVector phases;
};

struct EvalOptions {
  bool columnwise_phase = false;
  bool optimal_matching = false;
  double support_threshold = 0.0;
};

// Phase from X = DZ against X_true, permutation on D, then MNSE(D), phase-corrected
// MNSE(Z) and F-measure on the permuted codes.
Metrics evaluate_estimate(const CMatrix& D_est, const CMatrix& Z_est, const CMatrix& D_true,
                          const CMatrix& Z_true, const EvalOptions& opt = {});

}  // namespace prdl
