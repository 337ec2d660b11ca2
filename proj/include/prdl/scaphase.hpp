#pragma once

#include <optional>

#include "prdl/polynomial.hpp"
#include "prdl/problem.hpp"
#include "prdl/solver.hpp"

namespace prdl {

struct ScaphaseLineSearch {
  double gamma = 0.0;
  Quartic poly;
  CMatrix Q1;  // F(dX)
};

// Residuals of the auxiliary formulation: r_X = ||grad_X||, r_D and r_Z as in
// the compact case with weight rho.
Residuals prdl_residuals(const ProblemInstance& inst, const Iterate& it, const FullGradients& g,
                         const SupportMask* support = nullptr);

// Gradients of the smooth majorizer reusing the cached image.
FullGradients cached_gradients_prdl(const ProblemInstance& inst, const Iterate& it);

// SCAphase on the formulation with auxiliary signal X. mu = 0 is accepted for
// the X direction alone; the D and Z directions and run need mu > 0.
class Scaphase {
public:
  Scaphase(const ProblemInstance& inst, SolverConfig cfg = {});

  void restrict_support(SupportMask support);

  CMatrix direction_X(const Iterate& it, const CMatrix& grad_x) const;
  CMatrix direction_D(const Iterate& it, const CMatrix& grad_d) const;
  CMatrix direction_Z(const Iterate& it, const CMatrix& grad_z) const;
  ScaphaseLineSearch line_search(const Iterate& it, const CMatrix& dX, const CMatrix& dD,
                                 const CMatrix& dZ, const CMatrix& Z_next) const;
  Residuals stationarity_residual(const Iterate& it) const;

  SolverReport run(const InitialPoint& init) const;
  // Re-run with rho = 0 on the support of Z.
  SolverReport debias(const CMatrix& X, const CMatrix& D, const CMatrix& Z) const;

  const ProblemInstance& instance() const { return inst_; }

private:
  void require_positive_mu() const;

  const ProblemInstance& inst_;
  SolverConfig cfg_;
  RMatrix energy_;  // ||f_{n + iN}||^2
  std::optional<SupportMask> support_;
};

}  // namespace prdl
