#pragma once

#include <optional>

#include "prdl/polynomial.hpp"
#include "prdl/problem.hpp"
#include "prdl/secular.hpp"
#include "prdl/solver.hpp"

namespace prdl {

struct CompactLineSearch {
  double gamma = 0.0;
  Quartic poly;
  CMatrix Q1;  // F(dD Z + D dZ)
  CMatrix Q2;  // F(dD dZ)
};

// H_p with H_p d = vec(F(d z_row^T)); dense (M1 M2) x N.
CMatrix partial_block(const MixingOperator& op, const CVector& z_row);

// Compact-SCAphase on the formulation without the auxiliary signal.
class CompactScaphase {
public:
  CompactScaphase(const ProblemInstance& inst, SolverConfig cfg = {});

  // Hold entries outside `support` at zero (debiasing).
  void restrict_support(SupportMask support);

  CMatrix direction_D(const Iterate& it) const;
  CMatrix direction_Z(const Iterate& it, const CMatrix& grad_z) const;
  CompactLineSearch line_search(const Iterate& it, const CMatrix& dD, const CMatrix& dZ,
                                const CMatrix& Z_next) const;
  Residuals stationarity_residual(const Iterate& it) const;
  Residuals stationarity_residual(const Iterate& it, const CompactGradients& g) const;

  SolverReport run(const InitialPoint& init) const;
  SolverReport run(const CMatrix& D0, const CMatrix& Z0) const;
  // Re-run with lambda = 0 on the support of Z.
  SolverReport debias(const CMatrix& D, const CMatrix& Z) const;

  const ProblemInstance& instance() const { return inst_; }
  const SolverConfig& config() const { return cfg_; }

private:
  const ProblemInstance& inst_;
  SolverConfig cfg_;
  std::optional<ThinSVD> a_svd_;
  std::optional<SupportMask> support_;
};

}  // namespace prdl
