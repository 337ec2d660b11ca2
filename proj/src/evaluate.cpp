#include "prdl/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace prdl {

namespace {

double correlation(const CVector& a, const CVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    return 0.0;
  }
  return std::abs(a.dot(b)) / (na * nb);
}

double phase_of(Complex inner) { return inner == Complex(0.0) ? 0.0 : -std::arg(inner); }

// Minimum-cost assignment on a square matrix (Jonker-Volgenant style potentials).
std::vector<Index> hungarian(const RMatrix& cost) {
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  // row i -> column assignment
  std::vector<Index> col_of_row(n);
  for (Index j = 1; j <= n; ++j) {
    col_of_row[p[j] - 1] = j - 1;
  }
  return col_of_row;
}

}  // namespace

PhaseAlignment phase_align(const CMatrix& est, const CMatrix& truth, bool columnwise) {
  require_shape(est.rows() == truth.rows() && est.cols() == truth.cols(),
                "phase_align: shapes differ");
  PhaseAlignment out;
  if (columnwise) {
    out.phases.resize(est.cols());
    for (Index i = 0; i < est.cols(); ++i) {
      out.phases(i) = phase_of(truth.col(i).dot(est.col(i)));
    }
  } else {
    out.phases.resize(1);
    out.phases(0) = phase_of((truth.array().conjugate() * est.array()).sum());
  }
  out.aligned = apply_phases(est, out.phases);
  return out;
}

CMatrix apply_phases(const CMatrix& M, const RVector& phases) {
  if (phases.size() == 1) {
    return M * std::polar(1.0, phases(0));
  }
  require_shape(phases.size() == M.cols(), "one phase per column expected");
  CMatrix out = M;
  for (Index i = 0; i < M.cols(); ++i) {
    out.col(i) *= std::polar(1.0, phases(i));
  }
  return out;
}

std::vector<Index> match_permutation(const CMatrix& D_est, const CMatrix& D_true, bool optimal) {
  require_shape(D_est.rows() == D_true.rows() && D_est.cols() == D_true.cols(),
                "match_permutation: shapes differ");
  const Index P = D_true.cols();
  RMatrix C(P, P);  // C(q, p): true q vs estimate p
  for (Index q = 0; q < P; ++q) {
    for (Index p = 0; p < P; ++p) {
      C(q, p) = correlation(D_est.col(p), D_true.col(q));
    }
  }
  if (optimal) {
    return hungarian(-C);
  }
  std::vector<std::tuple<double, Index, Index>> pairs;
  pairs.reserve(static_cast<size_t>(P * P));
  for (Index q = 0; q < P; ++q) {
    for (Index p = 0; p < P; ++p) {
      pairs.emplace_back(C(q, p), q, p);
    }
  }
  // Largest correlation first; index order breaks ties.
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  std::vector<Index> perm(static_cast<size_t>(P), -1);
  std::vector<char> taken(static_cast<size_t>(P), 0);
  for (const auto& [c, q, p] : pairs) {
    if (perm[static_cast<size_t>(q)] < 0 && !taken[static_cast<size_t>(p)]) {
      perm[static_cast<size_t>(q)] = p;
      taken[static_cast<size_t>(p)] = 1;
    }
  }
  return perm;
}

CMatrix permute_columns(const CMatrix& D, const std::vector<Index>& perm) {
  CMatrix out(D.rows(), static_cast<Index>(perm.size()));
  for (size_t q = 0; q < perm.size(); ++q) {
    out.col(static_cast<Index>(q)) = D.col(perm[q]);
  }
  return out;
}

CMatrix permute_rows(const CMatrix& Z, const std::vector<Index>& perm) {
  CMatrix out(static_cast<Index>(perm.size()), Z.cols());
  for (size_t q = 0; q < perm.size(); ++q) {
    out.row(static_cast<Index>(q)) = Z.row(perm[q]);
  }
  return out;
}

double mnse_d(const CMatrix& D_est, const CMatrix& D_true) {
  require_shape(D_est.rows() == D_true.rows() && D_est.cols() == D_true.cols(),
                "mnse_d: shapes differ");
  double err = 0.0;
  for (Index p = 0; p < D_true.cols(); ++p) {
    const double n2 = D_est.col(p).squaredNorm();
    if (n2 == 0.0) {
      err += D_true.col(p).squaredNorm();
      continue;
    }
    const Complex alpha = D_est.col(p).dot(D_true.col(p)) / n2;
    err += (alpha * D_est.col(p) - D_true.col(p)).squaredNorm();
  }
  return err / D_true.squaredNorm();
}

double mnse_z(const CMatrix& Z_est, const CMatrix& Z_true) {
  return mnse_d(Z_est.transpose(), Z_true.transpose());
}

double f_measure(const CMatrix& Z_est, const CMatrix& Z_true, double threshold) {
  require_shape(Z_est.rows() == Z_true.rows() && Z_est.cols() == Z_true.cols(),
                "f_measure: shapes differ");
  long tp = 0, fp = 0, fn = 0;
  for (Index j = 0; j < Z_est.size(); ++j) {
    const bool e = std::abs(Z_est.data()[j]) > threshold;
    const bool t = Z_true.data()[j] != Complex(0.0);
    tp += e && t;
    fp += e && !t;
    fn += !e && t;
  }
  if (tp + fp + fn == 0) {
    return 1.0;
  }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double to_db(double ratio) { return 10.0 * std::log10(ratio); }

Metrics evaluate_estimate(const CMatrix& D_est, const CMatrix& Z_est, const CMatrix& D_true,
                          const CMatrix& Z_true, const EvalOptions& opt) {
  Metrics m;
  const PhaseAlignment pa = phase_align(D_est * Z_est, D_true * Z_true, opt.columnwise_phase);
  m.phases = pa.phases;
  m.perm = match_permutation(D_est, D_true, opt.optimal_matching);
  m.mnse_d = mnse_d(permute_columns(D_est, m.perm), D_true);
  const CMatrix Zp = apply_phases(permute_rows(Z_est, m.perm), m.phases);
  m.mnse_z = mnse_z(Zp, Z_true);
  m.f_measure = f_measure(Zp, Z_true, opt.support_threshold);
  return m;
}

}  // namespace prdl
