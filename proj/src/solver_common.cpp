#include "prdl/solver.hpp"

#include <cmath>

#include "prdl/random.hpp"
#include "prdl/secular.hpp"

namespace prdl {

namespace {

constexpr double kBoundaryTol = 1e-8;

}  // namespace

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) {
    throw ParameterError("epsilon must be positive");
  }
  if (max_iters < 1) {
    throw ParameterError("max_iters must be at least 1");
  }
  if (!(secular_tol > 0.0)) {
    throw ParameterError("secular_tol must be positive");
  }
  if (cache_refresh < 1) {
    throw ParameterError("cache_refresh must be at least 1");
  }
}

Residuals stopping_thresholds(const ProblemInstance& inst, double epsilon) {
  const auto& op = inst.op();
  const double m = static_cast<double>(op.out_rows()) * static_cast<double>(op.out_cols());
  const double N = static_cast<double>(op.signal_rows());
  const double P = static_cast<double>(inst.atoms());
  const double I = static_cast<double>(op.snapshots());
  return {m * std::sqrt(N * P) * epsilon, m * std::sqrt(P * I) * epsilon,
          m * std::sqrt(N * I) * epsilon};
}

double dictionary_residual(const CMatrix& D, const CMatrix& grad_d) {
  double total = 0.0;
  for (Index p = 0; p < D.cols(); ++p) {
    const auto g = grad_d.col(p);
    if (D.col(p).norm() < 1.0 - kBoundaryTol) {
      total += g.squaredNorm();
      continue;
    }
    // Sphere: remove the outward normal-cone component along d_p.
    const CVector d = D.col(p).normalized();
    const double radial = (d.adjoint() * g)(0).real();
    total += (g - std::min(0.0, radial) * d).squaredNorm();
  }
  return std::sqrt(total);
}

double code_residual(const CMatrix& Z, const CMatrix& grad_z, double weight,
                     const SupportMask* support) {
  double total = 0.0;
  for (Index j = 0; j < Z.size(); ++j) {
    if (support && !support->data()[j]) {
      continue;
    }
    const Complex z = Z.data()[j];
    const Complex g = grad_z.data()[j];
    if (z != Complex(0.0)) {
      total += abs2(g + weight * unit_phase(z));
    } else {
      const double excess = std::max(0.0, magnitude(g) - weight);
      total += excess * excess;
    }
  }
  return std::sqrt(total);
}

InitialPoint random_compact_start(const ProblemInstance& inst, const SolverConfig& cfg) {
  Rng rng(cfg.rng_seed);
  const Index N = inst.op().signal_rows();
  const Index P = inst.atoms();
  const Index I = inst.op().snapshots();
  InitialPoint start;
  start.D = unit_norm_columns(N, P, rng);
  const double scale =
      cfg.code_init_scale < 0.0 ? 1.0 / std::sqrt(static_cast<double>(P)) : cfg.code_init_scale;
  start.Z = scale * complex_gaussian(P, I, rng);
  return start;
}

InitialPoint random_full_start(const ProblemInstance& inst, const SolverConfig& cfg) {
  Rng rng(cfg.rng_seed);
  const Index N = inst.op().signal_rows();
  const Index P = inst.atoms();
  const Index I = inst.op().snapshots();
  InitialPoint start;
  start.X = cfg.signal_init_scale * complex_gaussian(N, I, rng);
  start.D = unit_norm_columns(N, P, rng);
  start.Z = pseudo_inverse(start.D) * start.X;
  return start;
}

CMatrix pseudo_inverse(const CMatrix& M) {
  const ThinSVD svd = thin_svd(M);
  if (svd.S.size() == 0) {
    return CMatrix::Zero(M.cols(), M.rows());
  }
  return svd.V * svd.S.cwiseInverse().asDiagonal() * svd.U.adjoint();
}

void project_columns(CMatrix& D) {
  for (Index p = 0; p < D.cols(); ++p) {
    const double n = D.col(p).norm();
    if (n > 1.0) {
      D.col(p) /= n;
    }
  }
}

}  // namespace prdl
