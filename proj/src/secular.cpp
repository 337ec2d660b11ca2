#include "prdl/secular.hpp"

#include <cmath>
#include <limits>

#include "prdl/operators.hpp"

namespace prdl {

namespace {

constexpr int kMaxIterations = 200;

// Beyond this norm of the normalized data the root nu exceeds every sigma^2 by
// a factor 1e100 and d is the normalized data direction to working precision.
constexpr double kDominant = 1e100;

// Solve psi = 1 and assemble d = V (Sigma^2 + nu)^{-1} c, projected into the ball.
// `spec` is normalized, sigma = kappa sigma_hat with max sigma_hat = 1 and
// c = kappa^2 c_hat, so psi never under- or overflows; nu is reported unscaled.
BallSolution assemble(const SecularSpectrum& spec, double kappa, const CMatrix& V, double tol) {
  BallSolution out;
  const double cn = spec.c.stableNorm();
  if (cn > kDominant) {
    out.d = V * (spec.c / cn);
    out.nu = kappa * kappa * cn;
    return out;
  }
  const SecularResult root = solve_secular(spec, tol);
  out.nu = kappa * kappa * root.nu;
  out.iterations = root.iterations;
  CVector coef(spec.c.size());
  for (Index i = 0; i < coef.size(); ++i) {
    coef(i) = spec.c(i) / (spec.sigma(i) * spec.sigma(i) + root.nu);
  }
  out.d = V * coef;
  const double n = out.d.norm();
  if (n > 1.0) {
    out.d /= n;
  }
  return out;
}

// sigma_hat = s / s_max and c_hat = sigma_hat .* (U^H y) / (scale^2 s_max): the
// normalized spectrum for H = scale U diag(s) V^H when H^H y = V diag(s) U^H y.
SecularSpectrum normalized_spectrum(const ThinSVD& svd, double scale, const CVector& y) {
  const double top = svd.S(0);
  SecularSpectrum spec;
  spec.sigma = svd.S / top;
  spec.c = spec.sigma.cast<Complex>().cwiseProduct((svd.U.adjoint() * y) / scale / scale) / top;
  return spec;
}

}  // namespace

PsiValue psi(const SecularSpectrum& spec, double nu) {
  require_shape(spec.sigma.size() == spec.c.size(), "spectrum and data lengths differ");
  PsiValue v;
  for (Index i = 0; i < spec.sigma.size(); ++i) {
    const double pole_gap = spec.sigma(i) * spec.sigma(i) + nu;
    if (!(pole_gap > 0.0)) {
      throw DomainError("psi evaluated at or left of a pole");
    }
    const double w = abs2(spec.c(i));
    v.value += w / (pole_gap * pole_gap);
    v.derivative -= 2.0 * w / (pole_gap * pole_gap * pole_gap);
  }
  if (!std::isfinite(v.value) || !std::isfinite(v.derivative)) {
    throw DomainError("psi is not finite");
  }
  return v;
}

std::pair<double, double> rational_interpolant(const SecularSpectrum& spec, double nu) {
  const PsiValue v = psi(spec, nu);
  const double alpha = 4.0 * v.value * v.value * v.value / (v.derivative * v.derivative);
  const double beta = nu + 2.0 * v.value / v.derivative;
  return {alpha, beta};
}

SecularResult solve_secular(const SecularSpectrum& spec, double tol) {
  if (!(tol > 0.0)) {
    throw ParameterError("secular tolerance must be positive");
  }
  SecularResult res;
  res.iterates.push_back(0.0);
  double nu = 0.0;
  PsiValue v = psi(spec, nu);
  while (v.value > 1.0 + tol) {
    if (res.iterations >= kMaxIterations) {
      throw DomainError("secular iteration did not converge");
    }
    const double next = nu + 2.0 * v.value * (1.0 - std::sqrt(v.value)) / v.derivative;
    PsiValue vn = psi(spec, next);
    ++res.iterations;
    if (vn.value < 1.0 - tol) {
      // Rounding overshoot: psi(nu) > 1 > psi(next); bisect the bracket.
      res.bisection_fallback = true;
      double lo = nu, hi = next;
      double mid = next;
      for (int b = 0; b < 200; ++b) {
        mid = 0.5 * (lo + hi);
        vn = psi(spec, mid);
        if (std::abs(vn.value - 1.0) <= tol || hi - lo <= std::numeric_limits<double>::epsilon() * hi) {
          break;
        }
        (vn.value > 1.0 ? lo : hi) = mid;
      }
      nu = mid;
      v = vn;
      res.iterates.push_back(nu);
      break;
    }
    nu = next;
    v = vn;
    res.iterates.push_back(nu);
  }
  res.nu = nu;
  return res;
}

ThinSVD thin_svd(const CMatrix& M) {
  ThinSVD out;
  if (M.size() == 0) {
    return out;
  }
  Eigen::BDCSVD<CMatrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& s = svd.singularValues();
  const double tol = s.size() > 0 ? rank_threshold(M.rows(), M.cols(), s(0)) : 0.0;
  Index r = 0;
  while (r < s.size() && s(r) > tol) {
    ++r;
  }
  out.U = svd.matrixU().leftCols(r);
  out.S = s.head(r);
  out.V = svd.matrixV().leftCols(r);
  return out;
}

BallSolution solve_ball_ls(const CMatrix& H, const CVector& y, double tol) {
  require_shape(H.rows() == y.size(), "ball LS: H rows must match y");
  require_shape(H.rows() >= 1 && H.cols() >= 1, "ball LS: empty system");
  const ThinSVD svd = thin_svd(H);
  if (svd.S.size() == 0) {
    return {CVector::Zero(H.cols()), 0.0, 0};
  }
  return assemble(normalized_spectrum(svd, 1.0, y), svd.S(0), svd.V, tol);
}

BallSolution solve_ball_ls_kron_projected(const ThinSVD& a_svd, double scale,
                                          const CVector& projected, const CVector& current,
                                          double tol) {
  if (scale == 0.0 || a_svd.S.size() == 0) {
    return {current, 0.0, 0};
  }
  return assemble(normalized_spectrum(a_svd, scale, projected), scale * a_svd.S(0), a_svd.V, tol);
}

BallSolution solve_ball_ls_kron(const ThinSVD& a_svd, const CMatrix& B, const CVector& z_row,
                                const CMatrix& Yp, const CVector& current, double tol) {
  require_shape(B.rows() == z_row.size(), "kron LS: B rows must match the code row");
  require_shape(Yp.cols() == B.cols(), "kron LS: target columns must match B");
  require_shape(a_svd.U.rows() == Yp.rows() || a_svd.S.size() == 0,
                "kron LS: target rows must match A");
  const CVector u = B.transpose() * z_row;
  return solve_ball_ls_kron_projected(a_svd, u.stableNorm(), Yp * u.conjugate(), current, tol);
}

}  // namespace prdl
