#pragma once

#include <string>

#include "prdl/operators.hpp"

namespace prdl {

enum class SolverKind { CompactScaphase, Scaphase, Scprime };

SolverKind parse_solver(const std::string& name);
const char* to_string(SolverKind s);

struct ComplexityDims {
  double N = 0, P = 0, I = 0, M1 = 0, M2 = 0;
};

// cost = cf * c(F) + flops
struct CostTerm {
  double cf = 0.0;
  double flops = 0.0;
  double at(double cF) const { return cf * cF + flops; }
};

// Dominant per-iteration flop counts.
struct ComplexityEstimate {
  SolverKind solver = SolverKind::CompactScaphase;
  double cF_lower = 0.0;  // 2 N I max(M1, M2)
  double cF_upper = 0.0;  // 2 M1 M2 N I
  CostTerm gradient;
  CostTerm hessian;
  CostTerm line_search;
  bool special_case = false;  // K = 1 Hessian count used
};

ComplexityEstimate estimate_complexity(SolverKind solver, const ComplexityDims& dims,
                                       bool time_invariant);
ComplexityEstimate estimate_complexity(SolverKind solver, const MixingOperator& op, Index atoms);

}  // namespace prdl
