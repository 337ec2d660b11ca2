#include "prdl/complexity.hpp"

#include <algorithm>

namespace prdl {

SolverKind parse_solver(const std::string& name) {
  if (name == "compact-scaphase" || name == "compact") {
    return SolverKind::CompactScaphase;
  }
  if (name == "scaphase") {
    return SolverKind::Scaphase;
  }
  if (name == "sc-prime" || name == "scprime") {
    return SolverKind::Scprime;
  }
  throw ParameterError("unknown solver '" + name + "'");
}

const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::CompactScaphase:
      return "compact-scaphase";
    case SolverKind::Scaphase:
      return "scaphase";
    case SolverKind::Scprime:
      return "sc-prime";
  }
  return "?";
}

ComplexityEstimate estimate_complexity(SolverKind solver, const ComplexityDims& d,
                                       bool time_invariant) {
  ComplexityEstimate e;
  e.solver = solver;
  e.cF_lower = 2.0 * d.N * d.I * std::max(d.M1, d.M2);
  e.cF_upper = 2.0 * d.M1 * d.M2 * d.N * d.I;
  const double npi = d.N * d.P * d.I;
  switch (solver) {
    case SolverKind::CompactScaphase:
      e.gradient = {1.0, 4.0 * npi};
      if (time_invariant) {
        e.special_case = true;
        e.hessian = {0.0, 2.0 * d.M1 * d.N * d.P + 2.0 * d.M2 * d.P * d.I};
      } else {
        e.hessian = {0.0, 4.0 * d.M1 * d.M2 * npi + d.M1 * d.M2 * d.N * d.N * d.P};
      }
      e.line_search = {2.0, 6.0 * npi};
      break;
    case SolverKind::Scaphase:
      e.gradient = {1.0, 4.0 * npi};
      e.hessian = {0.0, 2.0 * d.N * d.P + 2.0 * d.P * d.I};
      e.line_search = {1.0, 6.0 * npi};
      break;
    case SolverKind::Scprime:
      e.gradient = {2.0, 6.0 * npi};
      break;
  }
  return e;
}

ComplexityEstimate estimate_complexity(SolverKind solver, const MixingOperator& op, Index atoms) {
  const ComplexityDims d{static_cast<double>(op.signal_rows()), static_cast<double>(atoms),
                         static_cast<double>(op.snapshots()), static_cast<double>(op.out_rows()),
                         static_cast<double>(op.out_cols())};
  return estimate_complexity(solver, d, op.mixing_case() == MixingCase::TimeInvariant);
}

}  // namespace prdl
