#pragma once

#include <memory>

#include "prdl/operators.hpp"
#include "prdl/types.hpp"

namespace prdl {

// Magnitude measurements Y = |F(X)| + N together with the mixing operator,
// the dictionary size and the regularization weights of both formulations.
class ProblemInstance {
public:
  ProblemInstance(RMatrix Y, std::shared_ptr<const MixingOperator> op, Index atoms);

  const RMatrix& measurements() const { return y_; }
  const MixingOperator& op() const { return *op_; }
  std::shared_ptr<const MixingOperator> shared_op() const { return op_; }
  Index atoms() const { return p_; }

  double lambda = 0.0;  // compact formulation
  double mu = 0.0;      // coupling weight, auxiliary formulation
  double rho = 0.0;     // sparsity weight, auxiliary formulation

private:
  RMatrix y_;
  std::shared_ptr<const MixingOperator> op_;
  Index p_ = 0;
};

// Variables plus the cached operator image and the phase-matched target
// Y^{(t)} = Y .* exp(i arg(image)). X is empty for the compact formulation,
// where image = F(DZ); otherwise image = F(X).
struct Iterate {
  CMatrix X;
  CMatrix D;
  CMatrix Z;
  CMatrix image;
  CMatrix target;

  static Iterate compact(const ProblemInstance& inst, CMatrix D, CMatrix Z);
  static Iterate full(const ProblemInstance& inst, CMatrix X, CMatrix D, CMatrix Z);

  bool has_signal() const { return X.size() > 0; }
  // Recompute image from the variables and re-anchor the target.
  void refresh(const ProblemInstance& inst);
  // Re-anchor the target at the cached image.
  void reanchor(const ProblemInstance& inst);
  // Relative deviation of the cached image from a fresh evaluation.
  double cache_drift(const ProblemInstance& inst) const;
};

struct CompactGradients {
  CMatrix D;
  CMatrix Z;
};

struct FullGradients {
  CMatrix X;
  CMatrix D;
  CMatrix Z;
};

CMatrix phase_matched_target(const RMatrix& Y, const CMatrix& image);
double l1_norm(const CMatrix& Z);
// 1/2 ||Y - |image|||_F^2
double magnitude_misfit(const RMatrix& Y, const CMatrix& image);

double objective_cprdl(const ProblemInstance& inst, const CMatrix& D, const CMatrix& Z);
double objective_prdl(const ProblemInstance& inst, const CMatrix& X, const CMatrix& D,
                      const CMatrix& Z);

// Smooth majorizer 1/2 ||target - F(DZ)||^2 of the compact data term.
double majorizer_cprdl(const ProblemInstance& inst, const CMatrix& D, const CMatrix& Z,
                       const Iterate& anchor);
CompactGradients gradients_cprdl(const ProblemInstance& inst, const CMatrix& D,
                                 const CMatrix& Z, const Iterate& anchor);

// Smooth majorizer 1/2 ||target - F(X)||^2 + mu/2 ||X - DZ||^2.
double majorizer_prdl(const ProblemInstance& inst, const CMatrix& X, const CMatrix& D,
                      const CMatrix& Z, const Iterate& anchor);
FullGradients gradients_prdl(const ProblemInstance& inst, const CMatrix& X, const CMatrix& D,
                             const CMatrix& Z, const Iterate& anchor);

}  // namespace prdl
