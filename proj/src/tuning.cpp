#include "prdl/tuning.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace prdl {

namespace {

double spectral_norm(const CMatrix& M) {
  if (M.size() == 0) {
    return 0.0;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(M.adjoint() * M, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

double smallest_singular(const CMatrix& A) {
  if (A.rows() < A.cols()) {
    return 0.0;
  }
  return singular_values(A).minCoeff();
}

void require_independent(const MixingOperator& op) {
  if (!op.snapshots_independent()) {
    throw ParameterError("bound requires independently measured snapshots");
  }
}

}  // namespace

double lambda_max_general(const ProblemInstance& inst) {
  const MixingOperator& op = inst.op();
  double best = 0.0;
  switch (op.mixing_case()) {
    case MixingCase::TimeInvariant: {
      const double sa = spectral_norm(op.spatial(0));
      best = sa * op.temporal(0).rowwise().norm().maxCoeff();
      break;
    }
    case MixingCase::SnapshotSelectors:
      for (Index i = 0; i < op.snapshots(); ++i) {
        best = std::max(best, spectral_norm(op.spatial(i)));
      }
      break;
    case MixingCase::General:
      for (Index i = 0; i < op.snapshots(); ++i) {
        best = std::max(best, spectral_norm(op.block(i).F));
      }
      break;
  }
  return inst.measurements().norm() * best;
}

double lambda_max_time_invariant(const ProblemInstance& inst) {
  const MixingOperator& op = inst.op();
  if (op.mixing_case() != MixingCase::TimeInvariant) {
    throw ParameterError("bound requires a time-invariant operator");
  }
  const RVector ynorm = inst.measurements().colwise().norm().transpose();
  const RVector weighted = op.temporal(0).cwiseAbs() * ynorm;
  return spectral_norm(op.spatial(0)) * weighted.maxCoeff();
}

double lambda_max_independent(const ProblemInstance& inst) {
  const MixingOperator& op = inst.op();
  require_independent(op);
  const RVector ynorm = inst.measurements().colwise().norm().transpose();
  if (op.mixing_case() == MixingCase::TimeInvariant) {
    return spectral_norm(op.spatial(0)) * ynorm.maxCoeff();
  }
  double best = 0.0;
  for (Index i = 0; i < op.snapshots(); ++i) {
    best = std::max(best, spectral_norm(op.spatial(i)) * ynorm(i));
  }
  return best;
}

double lambda_max(const ProblemInstance& inst) {
  switch (inst.op().mixing_case()) {
    case MixingCase::TimeInvariant:
      return lambda_max_time_invariant(inst);
    case MixingCase::SnapshotSelectors:
      return lambda_max_independent(inst);
    case MixingCase::General:
      break;
  }
  return lambda_max_general(inst);
}

double rho_max_general(const ProblemInstance& inst) {
  const double mu = inst.mu;
  if (!(mu > 0.0)) {
    throw ParameterError("rho_max needs mu > 0");
  }
  const SpectralBounds s = inst.op().spectral_bounds();
  return mu * s.sigma_max * inst.measurements().norm() / (s.sigma_min * s.sigma_min + mu);
}

double rho_max_independent(const ProblemInstance& inst) {
  const double mu = inst.mu;
  if (!(mu > 0.0)) {
    throw ParameterError("rho_max needs mu > 0");
  }
  const MixingOperator& op = inst.op();
  require_independent(op);
  const RVector ynorm = inst.measurements().colwise().norm().transpose();
  auto term = [&](const CMatrix& A, double y) {
    const double smin = smallest_singular(A);
    return mu * spectral_norm(A) * y / (smin * smin + mu);
  };
  if (op.mixing_case() == MixingCase::TimeInvariant) {
    return term(op.spatial(0), ynorm.maxCoeff());
  }
  double best = 0.0;
  for (Index i = 0; i < op.snapshots(); ++i) {
    best = std::max(best, term(op.spatial(i), ynorm(i)));
  }
  return best;
}

double rho_max(const ProblemInstance& inst) {
  return inst.op().snapshots_independent() ? rho_max_independent(inst) : rho_max_general(inst);
}

double mu_default(const ProblemInstance& inst) {
  const double s = inst.op().spectral_bounds().sigma_min_nonzero;
  return s * s;
}

double grid_value(double upper, int k) { return upper * std::pow(0.75, k); }

std::vector<double> sparsity_grid(double upper, int count) {
  std::vector<double> g;
  for (int k = 0; k < count; ++k) {
    g.push_back(grid_value(upper, k));
  }
  return g;
}

CMatrix zero_code_signal(const ProblemInstance& inst, const CMatrix& X0, int sweeps) {
  const MixingOperator& op = inst.op();
  const double mu = inst.mu;
  if (!(mu > 0.0)) {
    throw ParameterError("zero_code_signal needs mu > 0");
  }
  CMatrix X = X0;
  if (op.snapshots_independent()) {
    const Index I = op.snapshots();
    std::vector<Eigen::LDLT<CMatrix>> solvers;
    const Index nsolve = op.mixing_case() == MixingCase::TimeInvariant ? 1 : I;
    for (Index i = 0; i < nsolve; ++i) {
      const CMatrix& A = op.spatial(i);
      solvers.emplace_back(A.adjoint() * A + mu * CMatrix::Identity(A.cols(), A.cols()));
    }
    for (int s = 0; s < sweeps; ++s) {
      const CMatrix rhs = op.adjoint(phase_matched_target(inst.measurements(), op.apply(X)));
      for (Index i = 0; i < I; ++i) {
        X.col(i) = solvers[static_cast<size_t>(nsolve == 1 ? 0 : i)].solve(rhs.col(i));
      }
    }
    return X;
  }
  // Conjugate gradients on (F^H F + mu I) vec(X) = F^H vec(target).
  for (int s = 0; s < sweeps; ++s) {
    const CMatrix rhs = op.adjoint(phase_matched_target(inst.measurements(), op.apply(X)));
    CMatrix r = rhs - op.adjoint(op.apply(X)) - mu * X;
    CMatrix p = r;
    double rr = r.squaredNorm();
    const double stop = 1e-28 * std::max(rhs.squaredNorm(), 1e-300);
    for (Index k = 0; k < 10 * X.size() && rr > stop; ++k) {
      const CMatrix Ap = op.adjoint(op.apply(p)) + mu * p;
      const double alpha = rr / real_inner(p, Ap);
      X += alpha * p;
      r -= alpha * Ap;
      const double rr_next = r.squaredNorm();
      p = r + (rr_next / rr) * p;
      rr = rr_next;
    }
  }
  return X;
}

}  // namespace prdl
