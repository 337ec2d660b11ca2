#include "prdl/compact_scaphase.hpp"

#include <chrono>
#include <cmath>

#include "prdl/shrinkage.hpp"

namespace prdl {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

CVector flat(const CMatrix& M) { return Eigen::Map<const CVector>(M.data(), M.size()); }

}  // namespace

CMatrix partial_block(const MixingOperator& op, const CVector& z_row) {
  require_shape(z_row.size() == op.snapshots(), "code row length must equal I");
  const Index M1 = op.out_rows();
  const Index M2 = op.out_cols();
  CMatrix H = CMatrix::Zero(M1 * M2, op.signal_rows());
  if (op.mixing_case() == MixingCase::SnapshotSelectors) {
    for (Index i = 0; i < op.snapshots(); ++i) {
      if (z_row(i) != Complex(0.0)) {
        H.middleRows(i * M1, M1) = z_row(i) * op.spatial(i);
      }
    }
    return H;
  }
  for (Index k = 0; k < op.diversity(); ++k) {
    const CVector u = op.temporal(k).transpose() * z_row;
    const CMatrix& A = op.spatial(k);
    for (Index m = 0; m < M2; ++m) {
      if (u(m) != Complex(0.0)) {
        H.middleRows(m * M1, M1) += u(m) * A;
      }
    }
  }
  return H;
}

CompactScaphase::CompactScaphase(const ProblemInstance& inst, SolverConfig cfg)
    : inst_(inst), cfg_(cfg) {
  cfg_.validate();
  if (inst_.lambda < 0.0) {
    throw ParameterError("lambda must be nonnegative");
  }
  if (inst_.op().mixing_case() == MixingCase::TimeInvariant) {
    a_svd_ = thin_svd(inst_.op().spatial(0));
  }
}

void CompactScaphase::restrict_support(SupportMask support) {
  require_shape(support.rows() == inst_.atoms() && support.cols() == inst_.op().snapshots(),
                "support mask shape mismatch");
  support_ = std::move(support);
}

CMatrix CompactScaphase::direction_D(const Iterate& it) const {
  const MixingOperator& op = inst_.op();
  const Index P = inst_.atoms();
  const CMatrix R = it.target - it.image;
  CMatrix Dn = it.D;
  if (a_svd_) {
    // H_p = (B^T z_p) (x) A; fold u_p into the residual once for all atoms.
    const CMatrix ZB = op.temporal_is_identity() ? it.Z : CMatrix(it.Z * op.temporal(0));
    const CMatrix RU = R * ZB.adjoint();
    const CMatrix AD = op.spatial(0) * it.D;
    for (Index p = 0; p < P; ++p) {
      const double un = ZB.row(p).stableNorm();
      if (un == 0.0) {
        continue;
      }
      const CVector proj = RU.col(p) + (un * un) * AD.col(p);
      Dn.col(p) =
          solve_ball_ls_kron_projected(*a_svd_, un, proj, it.D.col(p), cfg_.secular_tol).d;
    }
    return Dn;
  }
  const CVector r = flat(R);
  for (Index p = 0; p < P; ++p) {
    const CVector z = it.Z.row(p).transpose();
    if ((z.array() == Complex(0.0)).all()) {
      continue;
    }
    const CMatrix H = partial_block(op, z);
    const CVector y = r + H * it.D.col(p);
    Dn.col(p) = solve_ball_ls(H, y, cfg_.secular_tol).d;
  }
  return Dn;
}

CMatrix CompactScaphase::direction_Z(const Iterate& it, const CMatrix& grad_z) const {
  const RMatrix E = inst_.op().block_energy(it.D);
  CMatrix Zn(it.Z.rows(), it.Z.cols());
  for (Index j = 0; j < Zn.size(); ++j) {
    if (support_ && !support_->data()[j]) {
      Zn.data()[j] = 0.0;
      continue;
    }
    Zn.data()[j] = scalar_lasso(E.data()[j], it.Z.data()[j], grad_z.data()[j], inst_.lambda);
  }
  return Zn;
}

CompactLineSearch CompactScaphase::line_search(const Iterate& it, const CMatrix& dD,
                                               const CMatrix& dZ, const CMatrix& Z_next) const {
  const MixingOperator& op = inst_.op();
  CompactLineSearch ls;
  ls.Q1 = op.apply(dD * it.Z + it.D * dZ);
  ls.Q2 = op.apply(dD * dZ);
  const CMatrix R0 = it.image - it.target;
  const double dg = inst_.lambda * (l1_norm(Z_next) - l1_norm(it.Z));
  ls.poly.c = {0.5 * R0.squaredNorm(),
               real_inner(R0, ls.Q1) + dg,
               0.5 * ls.Q1.squaredNorm() + real_inner(R0, ls.Q2),
               real_inner(ls.Q1, ls.Q2),
               0.5 * ls.Q2.squaredNorm()};
  if (dD.squaredNorm() == 0.0 && dZ.squaredNorm() == 0.0) {
    ls.gamma = 0.0;
    return ls;
  }
  ls.gamma = minimize_on_unit_interval(ls.poly);
  return ls;
}

Residuals CompactScaphase::stationarity_residual(const Iterate& it,
                                                 const CompactGradients& g) const {
  Residuals r;
  r.d = dictionary_residual(it.D, g.D);
  r.z = code_residual(it.Z, g.Z, inst_.lambda, support_ ? &*support_ : nullptr);
  return r;
}

Residuals CompactScaphase::stationarity_residual(const Iterate& it) const {
  return stationarity_residual(it, gradients_cprdl(inst_, it.D, it.Z, it));
}

SolverReport CompactScaphase::run(const InitialPoint& init) const { return run(init.D, init.Z); }

SolverReport CompactScaphase::run(const CMatrix& D0, const CMatrix& Z0) const {
  const auto t0 = Clock::now();
  const MixingOperator& op = inst_.op();
  Iterate it = Iterate::compact(inst_, D0, Z0);
  if (support_) {
    for (Index j = 0; j < it.Z.size(); ++j) {
      if (!support_->data()[j]) {
        it.Z.data()[j] = 0.0;
      }
    }
    it.refresh(inst_);
  }
  const Residuals tol = stopping_thresholds(inst_, cfg_.epsilon);
  SolverReport rep;
  for (int t = 0;; ++t) {
    const CMatrix back = op.adjoint(it.image - it.target);
    const CompactGradients g{back * it.Z.adjoint(), it.D.adjoint() * back};
    const Residuals res = stationarity_residual(it, g);
    const double obj = magnitude_misfit(inst_.measurements(), it.image) +
                       inst_.lambda * l1_norm(it.Z);
    if (!std::isfinite(obj)) {
      throw SolverError("compact-SCAphase: non-finite objective at iteration " +
                        std::to_string(t));
    }
    rep.objective = obj;
    rep.residual = res;
    rep.iterations = t;
    if (cfg_.record_trace) {
      rep.trace.push_back({t, obj, res, std::numeric_limits<double>::quiet_NaN(), elapsed(t0)});
    }
    if (res.d <= tol.d && res.z <= tol.z) {
      rep.converged = true;
      break;
    }
    if (t >= cfg_.max_iters) {
      break;
    }
    const CMatrix Dn = direction_D(it);
    const CMatrix Zn = direction_Z(it, g.Z);
    const CMatrix dD = Dn - it.D;
    const CMatrix dZ = Zn - it.Z;
    const CompactLineSearch ls = line_search(it, dD, dZ, Zn);
    const double gm = ls.gamma;
    if (cfg_.record_trace) {
      rep.trace.back().step = gm;
    }
    it.D += gm * dD;
    it.Z += gm * dZ;
    project_columns(it.D);
    it.image += gm * ls.Q1 + (gm * gm) * ls.Q2;
    if ((t + 1) % cfg_.cache_refresh == 0) {
      it.refresh(inst_);
    } else {
      it.reanchor(inst_);
    }
  }
  rep.D = std::move(it.D);
  rep.Z = std::move(it.Z);
  rep.seconds = elapsed(t0);
  return rep;
}

SolverReport CompactScaphase::debias(const CMatrix& D, const CMatrix& Z) const {
  SupportMask mask = (Z.array() != Complex(0.0));
  if (!mask.any()) {
    SolverReport rep;
    rep.D = D;
    rep.Z = Z;
    rep.objective = magnitude_misfit(inst_.measurements(), inst_.op().apply(D * Z));
    rep.converged = true;
    return rep;
  }
  ProblemInstance relaxed = inst_;
  relaxed.lambda = 0.0;
  CompactScaphase inner(relaxed, cfg_);
  inner.restrict_support(std::move(mask));
  return inner.run(D, Z);
}

}  // namespace prdl
