#include "prdl/scprime.hpp"

#include <array>
#include <chrono>
#include <cmath>

#include "prdl/scaphase.hpp"
#include "prdl/shrinkage.hpp"

namespace prdl {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Scprime::Scprime(const ProblemInstance& inst, SolverConfig cfg, ScprimeConstants k)
    : inst_(inst), cfg_(cfg), k_(k) {
  cfg_.validate();
  if (!(inst_.mu > 0.0)) {
    throw ParameterError("SC-PRIME needs mu > 0");
  }
  if (k_.x_lipschitz > 0.0) {
    x_lip_ = k_.x_lipschitz;
  } else {
    const double s = inst_.op().spectral_bounds().sigma_max;
    x_lip_ = s * s + inst_.mu;
  }
}

void Scprime::restrict_support(SupportMask support) {
  require_shape(support.rows() == inst_.atoms() && support.cols() == inst_.op().snapshots(),
                "support mask shape mismatch");
  support_ = std::move(support);
}

void Scprime::sweep(Iterate& it, const FullGradients& g, std::array<double, 4>* values) const {
  const MixingOperator& op = inst_.op();
  const double mu = inst_.mu;
  const Index P = inst_.atoms();
  const SupportMask* mask = support_ ? &*support_ : nullptr;
  auto record = [&](int k) {
    if (values) {
      (*values)[static_cast<size_t>(k)] =
          majorizer_prdl(inst_, it.X, it.D, it.Z, it) + inst_.rho * l1_norm(it.Z);
    }
  };
  record(0);
  // X block.
  it.X -= g.X / x_lip_;
  it.image = op.apply(it.X);
  record(1);

  // D block, one column at a time.
  CMatrix G = it.D * it.Z - it.X;
  const double zf2 = it.Z.squaredNorm();
  const double ld = k_.d_lipschitz > 0.0 ? k_.d_lipschitz : mu * zf2;
  if (zf2 > 0.0 && ld > 0.0) {
    for (Index p = 0; p < P; ++p) {
      const CVector grad = mu * G * it.Z.row(p).adjoint();
      CVector d = it.D.col(p) - grad / ld;
      const double n = d.norm();
      if (n > 1.0) {
        d /= n;
      }
      const CVector delta = d - it.D.col(p);
      G.noalias() += delta * it.Z.row(p);
      it.D.col(p) = d;
    }
  }
  record(2);

  // Z block.
  const double lz = k_.z_lipschitz > 0.0 ? k_.z_lipschitz : mu * static_cast<double>(P);
  const CMatrix gz = mu * it.D.adjoint() * G;
  for (Index j = 0; j < it.Z.size(); ++j) {
    if (mask && !mask->data()[j]) {
      continue;
    }
    it.Z.data()[j] = scalar_lasso(lz, it.Z.data()[j], gz.data()[j], inst_.rho);
  }
  record(3);
}

SolverReport Scprime::run(const InitialPoint& init) const {
  const auto t0 = Clock::now();
  const double mu = inst_.mu;
  const SupportMask* mask = support_ ? &*support_ : nullptr;
  Iterate it = Iterate::full(inst_, init.X, init.D, init.Z);
  if (mask) {
    it.Z = it.Z.array() * mask->cast<Complex>();
  }
  const Residuals tol = stopping_thresholds(inst_, cfg_.epsilon);
  SolverReport rep;
  for (int t = 0;; ++t) {
    const FullGradients g = cached_gradients_prdl(inst_, it);
    const Residuals res = prdl_residuals(inst_, it, g, mask);
    const double obj = magnitude_misfit(inst_.measurements(), it.image) +
                       0.5 * mu * (it.X - it.D * it.Z).squaredNorm() + inst_.rho * l1_norm(it.Z);
    if (!std::isfinite(obj)) {
      throw SolverError("SC-PRIME: non-finite objective at iteration " + std::to_string(t));
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

    sweep(it, g);

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

SolverReport Scprime::debias(const CMatrix& X, const CMatrix& D, const CMatrix& Z) const {
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
  Scprime inner(relaxed, cfg_, k_);
  inner.restrict_support(std::move(mask));
  return inner.run({X, D, Z});
}

}  // namespace prdl
