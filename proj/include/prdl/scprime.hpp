#pragma once

#include <array>
#include <optional>

#include "prdl/problem.hpp"
#include "prdl/solver.hpp"

namespace prdl {

// Step constants of the block-coordinate baseline. Nonpositive values select
// the defaults sigma_max(F)^2 + mu, mu ||Z||_F^2 and mu P.
struct ScprimeConstants {
  double x_lipschitz = -1.0;
  double d_lipschitz = -1.0;
  double z_lipschitz = -1.0;
};

// SC-PRIME style block successive upper-bound minimization on the auxiliary
// formulation: one majorized gradient step per block (X, then columns of D,
// then Z) with constant curvature bounds and no line search.
class Scprime {
public:
  Scprime(const ProblemInstance& inst, SolverConfig cfg = {}, ScprimeConstants k = {});

  void restrict_support(SupportMask support);

  SolverReport run(const InitialPoint& init) const;
  // One X, D, Z sweep at the anchor held in `it` (gradients `g` taken there).
  // When `values` is given it receives the anchored majorizer plus rho ||Z||_1
  // before the sweep and after each block.
  void sweep(Iterate& it, const FullGradients& g, std::array<double, 4>* values = nullptr) const;
  SolverReport debias(const CMatrix& X, const CMatrix& D, const CMatrix& Z) const;

private:
  const ProblemInstance& inst_;
  SolverConfig cfg_;
  ScprimeConstants k_;
  double x_lip_ = 0.0;
  std::optional<SupportMask> support_;
};

}  // namespace prdl
