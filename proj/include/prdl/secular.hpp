#pragma once

#include <vector>

#include "prdl/types.hpp"

namespace prdl {

// psi(nu) = sum_i |c_i|^2 / (sigma_i^2 + nu)^2 with sigma_i > 0.
struct SecularSpectrum {
  RVector sigma;
  CVector c;
};

struct PsiValue {
  double value = 0.0;
  double derivative = 0.0;
};

PsiValue psi(const SecularSpectrum& spec, double nu);

struct SecularResult {
  double nu = 0.0;
  int iterations = 0;
  // nu^(0), nu^(1), ..., nu^(final) of the rational-approximation sequence.
  std::vector<double> iterates;
  // Set when rounding pushed an iterate past the root and bisection was used.
  bool bisection_fallback = false;
};

// Root of psi(nu) = 1 on (0, inf) by successive rational interpolation
// F(nu) = alpha / (beta - nu)^2 starting from nu = 0; returns 0 when psi(0) <= 1.
SecularResult solve_secular(const SecularSpectrum& spec, double tol = 1e-9);

// Interpolant parameters (alpha, beta) matching psi and psi' at nu.
std::pair<double, double> rational_interpolant(const SecularSpectrum& spec, double nu);

struct BallSolution {
  CVector d;
  double nu = 0.0;
  int iterations = 0;
};

// Rank-truncated compact SVD.
struct ThinSVD {
  CMatrix U;
  RVector S;
  CMatrix V;
};

ThinSVD thin_svd(const CMatrix& M);

// argmin_d 1/2 ||H d - y||^2  s.t. ||d|| <= 1.
BallSolution solve_ball_ls(const CMatrix& H, const CVector& y, double tol = 1e-9);

// Same subproblem for H = (B^T z) (x) A using the SVD of A only. `Yp` is the
// M1 x M2 target; `current` is returned unchanged when B^T z vanishes.
BallSolution solve_ball_ls_kron(const ThinSVD& a_svd, const CMatrix& B, const CVector& z_row,
                                const CMatrix& Yp, const CVector& current, double tol = 1e-9);

// Core of the Kronecker path once the temporal factor u = B^T z has been
// folded into the data: scale = ||u||, projected = Yp * conj(u).
BallSolution solve_ball_ls_kron_projected(const ThinSVD& a_svd, double scale,
                                          const CVector& projected, const CVector& current,
                                          double tol = 1e-9);

}  // namespace prdl
