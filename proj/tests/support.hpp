#pragma once

#include <memory>
#include <vector>

#include "prdl/operators.hpp"
#include "prdl/problem.hpp"
#include "prdl/random.hpp"

namespace prdl::testing {

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline double rel_err(const CMatrix& a, const CMatrix& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-300});
}

inline MixingOperator random_general(Index K, Index M1, Index N, Index I, Index M2, Rng& rng) {
  std::vector<MixingComponent> comps;
  for (Index k = 0; k < K; ++k) {
    comps.push_back({complex_gaussian(M1, N, rng), complex_gaussian(I, M2, rng)});
  }
  return MixingOperator::general(std::move(comps));
}

inline MixingOperator random_selectors(Index M1, Index N, Index I, Rng& rng) {
  std::vector<CMatrix> A;
  for (Index i = 0; i < I; ++i) {
    A.push_back(complex_gaussian(M1, N, rng));
  }
  return MixingOperator::snapshot_selectors(std::move(A));
}

// Nonnegative measurements |F(X)| + small positive offset so Y is generic.
inline ProblemInstance random_instance(std::shared_ptr<const MixingOperator> op, Index P,
                                       Rng& rng) {
  const CMatrix X = complex_gaussian(op->signal_rows(), op->snapshots(), rng);
  RMatrix Y = op->apply(X).cwiseAbs();
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (Index j = 0; j < Y.size(); ++j) {
    Y.data()[j] += u(rng);
  }
  return ProblemInstance(std::move(Y), std::move(op), P);
}

template <typename Op>
std::shared_ptr<const MixingOperator> share(Op&& op) {
  return std::make_shared<const MixingOperator>(std::forward<Op>(op));
}

// Dictionary with columns strictly inside the unit ball.
inline CMatrix interior_dictionary(Index N, Index P, Rng& rng) {
  CMatrix D = unit_norm_columns(N, P, rng);
  std::uniform_real_distribution<double> u(0.3, 0.9);
  for (Index p = 0; p < P; ++p) {
    D.col(p) *= u(rng);
  }
  return D;
}

// Central finite-difference check of a Wirtinger gradient g = 2 df/dconj(x):
// df along real direction E equals Re<g, E>, along iE equals Re<g, iE>.
template <typename F>
double fd_gradient_error(F&& f, const CMatrix& x, const CMatrix& grad, Rng& rng, int probes = 6,
                         double h = 1e-6) {
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    CMatrix E = complex_gaussian(x.rows(), x.cols(), rng);
    E /= E.norm();
    const double fd = (f(x + h * E) - f(x - h * E)) / (2.0 * h);
    const double an = real_inner(grad, E);
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), grad.norm() * 1e-3));
  }
  return worst;
}

// Minimizer of curv/2 |z - z0|^2 + Re(conj(g)(z - z0)) + t|z| by zooming grids.
inline Complex grid_prox(double curv, Complex z0, Complex g, double t) {
  auto f = [&](Complex z) {
    return 0.5 * curv * std::norm(z - z0) + std::real(std::conj(g) * (z - z0)) + t * std::abs(z);
  };
  Complex center = 0.0;
  double half = std::abs(z0) + std::abs(g) / curv + 1.0;
  for (int round = 0; round < 12; ++round) {
    Complex best = center;
    for (int a = -50; a <= 50; ++a)
      for (int b = -50; b <= 50; ++b) {
        const Complex z = center + Complex(a, b) * (half / 50.0);
        if (f(z) < f(best)) best = z;
      }
    center = best;
    half /= 10.0;
  }
  return center;
}

// Dense minimum of a scalar function on [0, 1].
template <typename F>
double grid_min(F&& f, int points = 100000) {
  double best = f(0.0);
  for (int k = 1; k <= points; ++k) best = std::min(best, f(static_cast<double>(k) / points));
  return best;
}

struct Planted {
  std::shared_ptr<const MixingOperator> op;
  CMatrix D;
  CMatrix Z;
};

// Unit-norm D and sparse Z (about half the entries nonzero, at least one per column).
inline Planted planted(std::shared_ptr<const MixingOperator> op, Index P, Rng& rng) {
  Planted pl{op, unit_norm_columns(op->signal_rows(), P, rng),
             complex_gaussian(P, op->snapshots(), rng)};
  std::bernoulli_distribution keep(0.5);
  for (Index i = 0; i < pl.Z.cols(); ++i) {
    const Index forced = i % P;
    for (Index p = 0; p < P; ++p) {
      if (p != forced && !keep(rng)) pl.Z(p, i) = 0.0;
    }
  }
  return pl;
}

}  // namespace prdl::testing
