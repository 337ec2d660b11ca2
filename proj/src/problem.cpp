#include "prdl/problem.hpp"

#include <cmath>

namespace prdl {

ProblemInstance::ProblemInstance(RMatrix Y, std::shared_ptr<const MixingOperator> op,
                                 Index atoms)
    : y_(std::move(Y)), op_(std::move(op)), p_(atoms) {
  if (!op_) {
    throw ParameterError("problem instance needs an operator");
  }
  require_shape(y_.rows() == op_->out_rows() && y_.cols() == op_->out_cols(),
                "measurements do not match operator output shape");
  if (!(y_.array() >= 0.0).all()) {
    throw DomainError("measurements must be nonnegative");
  }
  if (p_ < 1 || p_ >= op_->snapshots()) {
    throw ParameterError("dictionary size must satisfy 1 <= P < I");
  }
}

Iterate Iterate::compact(const ProblemInstance& inst, CMatrix D, CMatrix Z) {
  require_shape(D.rows() == inst.op().signal_rows() && D.cols() == inst.atoms(),
                "dictionary shape mismatch");
  require_shape(Z.rows() == inst.atoms() && Z.cols() == inst.op().snapshots(),
                "code shape mismatch");
  Iterate it;
  it.D = std::move(D);
  it.Z = std::move(Z);
  it.refresh(inst);
  return it;
}

Iterate Iterate::full(const ProblemInstance& inst, CMatrix X, CMatrix D, CMatrix Z) {
  require_shape(X.rows() == inst.op().signal_rows() && X.cols() == inst.op().snapshots(),
                "signal shape mismatch");
  require_shape(D.rows() == inst.op().signal_rows() && D.cols() == inst.atoms(),
                "dictionary shape mismatch");
  require_shape(Z.rows() == inst.atoms() && Z.cols() == inst.op().snapshots(),
                "code shape mismatch");
  Iterate it;
  it.X = std::move(X);
  it.D = std::move(D);
  it.Z = std::move(Z);
  it.refresh(inst);
  return it;
}

void Iterate::refresh(const ProblemInstance& inst) {
  image = has_signal() ? inst.op().apply(X) : inst.op().apply(D * Z);
  reanchor(inst);
}

void Iterate::reanchor(const ProblemInstance& inst) {
  target = phase_matched_target(inst.measurements(), image);
}

double Iterate::cache_drift(const ProblemInstance& inst) const {
  const CMatrix fresh = has_signal() ? inst.op().apply(X) : inst.op().apply(D * Z);
  const double scale = std::max(fresh.norm(), 1e-300);
  return (fresh - image).norm() / scale;
}

CMatrix phase_matched_target(const RMatrix& Y, const CMatrix& image) {
  require_shape(Y.rows() == image.rows() && Y.cols() == image.cols(),
                "target shape mismatch");
  CMatrix T(Y.rows(), Y.cols());
  for (Index j = 0; j < T.size(); ++j) {
    T.data()[j] = Y.data()[j] * unit_phase(image.data()[j]);
  }
  return T;
}

double l1_norm(const CMatrix& Z) {
  double acc = 0.0;
  for (Index j = 0; j < Z.size(); ++j) {
    acc += magnitude(Z.data()[j]);
  }
  return acc;
}

double magnitude_misfit(const RMatrix& Y, const CMatrix& image) {
  require_shape(Y.rows() == image.rows() && Y.cols() == image.cols(),
                "measurement shape mismatch");
  double acc = 0.0;
  for (Index j = 0; j < Y.size(); ++j) {
    const double r = Y.data()[j] - magnitude(image.data()[j]);
    acc += r * r;
  }
  return 0.5 * acc;
}

double objective_cprdl(const ProblemInstance& inst, const CMatrix& D, const CMatrix& Z) {
  require_shape(D.cols() == Z.rows(), "D and Z are not conformable");
  return magnitude_misfit(inst.measurements(), inst.op().apply(D * Z)) +
         inst.lambda * l1_norm(Z);
}

double objective_prdl(const ProblemInstance& inst, const CMatrix& X, const CMatrix& D,
                      const CMatrix& Z) {
  require_shape(D.cols() == Z.rows(), "D and Z are not conformable");
  require_shape(X.rows() == D.rows() && X.cols() == Z.cols(), "X does not match DZ");
  return magnitude_misfit(inst.measurements(), inst.op().apply(X)) +
         0.5 * inst.mu * (X - D * Z).squaredNorm() + inst.rho * l1_norm(Z);
}

double majorizer_cprdl(const ProblemInstance& inst, const CMatrix& D, const CMatrix& Z,
                       const Iterate& anchor) {
  require_shape(D.cols() == Z.rows(), "D and Z are not conformable");
  return 0.5 * (anchor.target - inst.op().apply(D * Z)).squaredNorm();
}

CompactGradients gradients_cprdl(const ProblemInstance& inst, const CMatrix& D,
                                 const CMatrix& Z, const Iterate& anchor) {
  require_shape(D.cols() == Z.rows(), "D and Z are not conformable");
  const CMatrix back = inst.op().adjoint(inst.op().apply(D * Z) - anchor.target);
  return {back * Z.adjoint(), D.adjoint() * back};
}

double majorizer_prdl(const ProblemInstance& inst, const CMatrix& X, const CMatrix& D,
                      const CMatrix& Z, const Iterate& anchor) {
  require_shape(D.cols() == Z.rows(), "D and Z are not conformable");
  return 0.5 * (anchor.target - inst.op().apply(X)).squaredNorm() +
         0.5 * inst.mu * (X - D * Z).squaredNorm();
}

FullGradients gradients_prdl(const ProblemInstance& inst, const CMatrix& X, const CMatrix& D,
                             const CMatrix& Z, const Iterate& anchor) {
  require_shape(D.cols() == Z.rows(), "D and Z are not conformable");
  const CMatrix gap = D * Z - X;
  FullGradients g;
  g.X = inst.op().adjoint(inst.op().apply(X) - anchor.target) - inst.mu * gap;
  g.D = inst.mu * gap * Z.adjoint();
  g.Z = inst.mu * D.adjoint() * gap;
  return g;
}

}  // namespace prdl
