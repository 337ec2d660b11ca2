#include "prdl/scaphase.hpp"

#include <chrono>
#include <cmath>

#include "prdl/shrinkage.hpp"

namespace prdl {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Residuals prdl_residuals(const ProblemInstance& inst, const Iterate& it, const FullGradients& g,
                         const SupportMask* support) {
  Residuals r;
  r.x = g.X.norm();
  r.d = dictionary_residual(it.D, g.D);
  r.z = code_residual(it.Z, g.Z, inst.rho, support);
  return r;
}

FullGradients cached_gradients_prdl(const ProblemInstance& inst, const Iterate& it) {
  const CMatrix gap = it.D * it.Z - it.X;
  FullGradients g;
  g.X = inst.op().adjoint(it.image - it.target) - inst.mu * gap;
  g.D = inst.mu * gap * it.Z.adjoint();
  g.Z = inst.mu * it.D.adjoint() * gap;
  return g;
}

Scaphase::Scaphase(const ProblemInstance& inst, SolverConfig cfg) : inst_(inst), cfg_(cfg) {
  cfg_.validate();
  if (!(inst_.mu >= 0.0)) {
    throw ParameterError("mu must be nonnegative");
  }
  if (inst_.rho < 0.0) {
    throw ParameterError("rho must be nonnegative");
  }
  energy_ = inst_.op().column_energy();
}

void Scaphase::restrict_support(SupportMask support) {
  require_shape(support.rows() == inst_.atoms() && support.cols() == inst_.op().snapshots(),
                "support mask shape mismatch");
  support_ = std::move(support);
}

CMatrix Scaphase::direction_X(const Iterate& it, const CMatrix& grad_x) const {
  CMatrix Xn = it.X;
  for (Index j = 0; j < Xn.size(); ++j) {
    const double den = energy_.data()[j] + inst_.mu;
    if (den > 0.0) {
      Xn.data()[j] -= grad_x.data()[j] / den;
    }
  }
  return Xn;
}

CMatrix Scaphase::direction_D(const Iterate& it, const CMatrix& grad_d) const {
  require_positive_mu();
  CMatrix Dn = it.D;
  for (Index p = 0; p < Dn.cols(); ++p) {
    const double zn = it.Z.row(p).stableNorm();
    const double gn = grad_d.col(p).stableNorm();
    if (zn == 0.0 || gn == 0.0) {
      continue;
    }
    // Step length ||grad|| / (mu ||z_p||^2) without squaring ||z_p||.
    const double step = gn / (inst_.mu * zn) / zn;
    if (step > 1e100) {
      Dn.col(p) = -grad_d.col(p) / gn;
      continue;
    }
    CVector d = it.D.col(p) - (step / gn) * grad_d.col(p);
    const double n = d.norm();
    if (n > 1.0) {
      d /= n;
    }
    Dn.col(p) = d;
  }
  return Dn;
}

CMatrix Scaphase::direction_Z(const Iterate& it, const CMatrix& grad_z) const {
  require_positive_mu();
  const RVector d2 = it.D.colwise().squaredNorm().transpose();
  CMatrix Zn(it.Z.rows(), it.Z.cols());
  for (Index i = 0; i < Zn.cols(); ++i) {
    for (Index p = 0; p < Zn.rows(); ++p) {
      if (support_ && !(*support_)(p, i)) {
        Zn(p, i) = 0.0;
        continue;
      }
      Zn(p, i) = scalar_lasso(inst_.mu * d2(p), it.Z(p, i), grad_z(p, i), inst_.rho);
    }
  }
  return Zn;
}

ScaphaseLineSearch Scaphase::line_search(const Iterate& it, const CMatrix& dX, const CMatrix& dD,
                                         const CMatrix& dZ, const CMatrix& Z_next) const {
  const double mu = inst_.mu;
  ScaphaseLineSearch ls;
  ls.Q1 = inst_.op().apply(dX);
  const CMatrix R0 = it.image - it.target;
  const CMatrix E0 = it.X - it.D * it.Z;
  const CMatrix E1 = dX - dD * it.Z - it.D * dZ;
  const CMatrix E2 = -(dD * dZ);
  const double dg = inst_.rho * (l1_norm(Z_next) - l1_norm(it.Z));
  ls.poly.c = {0.5 * R0.squaredNorm() + 0.5 * mu * E0.squaredNorm(),
               real_inner(R0, ls.Q1) + mu * real_inner(E0, E1) + dg,
               0.5 * ls.Q1.squaredNorm() + 0.5 * mu * (E1.squaredNorm() + 2.0 * real_inner(E0, E2)),
               mu * real_inner(E1, E2),
               0.5 * mu * E2.squaredNorm()};
  if (dX.squaredNorm() == 0.0 && dD.squaredNorm() == 0.0 && dZ.squaredNorm() == 0.0) {
    ls.gamma = 0.0;
    return ls;
  }
  ls.gamma = minimize_on_unit_interval(ls.poly);
  return ls;
}

Residuals Scaphase::stationarity_residual(const Iterate& it) const {
  return prdl_residuals(inst_, it, cached_gradients_prdl(inst_, it),
                        support_ ? &*support_ : nullptr);
}

void Scaphase::require_positive_mu() const {
  if (!(inst_.mu > 0.0)) {
    throw ParameterError("SCAphase needs mu > 0");
  }
}

SolverReport Scaphase::run(const InitialPoint& init) const {
  require_positive_mu();
  const auto t0 = Clock::now();
  Iterate it = Iterate::full(inst_, init.X, init.D, init.Z);
  if (support_) {
    it.Z = it.Z.array() * support_->cast<Complex>();
  }
  const Residuals tol = stopping_thresholds(inst_, cfg_.epsilon);
  SolverReport rep;
  for (int t = 0;; ++t) {
    const FullGradients g = cached_gradients_prdl(inst_, it);
    const Residuals res = prdl_residuals(inst_, it, g, support_ ? &*support_ : nullptr);
    const double obj = magnitude_misfit(inst_.measurements(), it.image) +
                       0.5 * inst_.mu * (it.X - it.D * it.Z).squaredNorm() +
                       inst_.rho * l1_norm(it.Z);
    if (!std::isfinite(obj)) {
      throw SolverError("SCAphase: non-finite objective at iteration " + std::to_string(t));
    }
    rep.objective = obj;
    rep.residual = res;
    rep.iterations = t;
    if (cfg_.record_trace) {
      rep.trace.push_back({t, obj, res, std::numeric_limits<double>::quiet_NaN(), elapsed(t0)});
    }
    if (res.d <= tol.d && res.z <= tol.z && res.x <= tol.x) {
      rep.converged = true;
      break;
    }
    if (t >= cfg_.max_iters) {
      break;
    }
    const CMatrix Xn = direction_X(it, g.X);
    const CMatrix Dn = direction_D(it, g.D);
    const CMatrix Zn = direction_Z(it, g.Z);
    const CMatrix dX = Xn - it.X;
    const CMatrix dD = Dn - it.D;
    const CMatrix dZ = Zn - it.Z;
    const ScaphaseLineSearch ls = line_search(it, dX, dD, dZ, Zn);
    const double gm = ls.gamma;
    if (cfg_.record_trace) {
      rep.trace.back().step = gm;
    }
    it.X += gm * dX;
    it.D += gm * dD;
    it.Z += gm * dZ;
    project_columns(it.D);
    it.image += gm * ls.Q1;
    if ((t + 1) % cfg_.cache_refresh == 0) {
      it.refresh(inst_);
    } else {
      it.reanchor(inst_);
    }
  }
  rep.X = std::move(it.X);
  rep.D = std::move(it.D);
  rep.Z = std::move(it.Z);
  rep.seconds = elapsed(t0);
  return rep;
}

SolverReport Scaphase::debias(const CMatrix& X, const CMatrix& D, const CMatrix& Z) const {
  SupportMask mask = (Z.array() != Complex(0.0));
  if (!mask.any()) {
    SolverReport rep;
    rep.X = X;
    rep.D = D;
    rep.Z = Z;
    rep.objective = objective_prdl(inst_, X, D, Z) - inst_.rho * l1_norm(Z);
    rep.converged = true;
    return rep;
  }
  ProblemInstance relaxed = inst_;
  relaxed.rho = 0.0;
  Scaphase inner(relaxed, cfg_);
  inner.restrict_support(std::move(mask));
  return inner.run({X, D, Z});
}

}  // namespace prdl
