#include "prdl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace prdl {

namespace {

// Dense SVD is used for spectral bounds below this many entries of F.
constexpr double kDenseSpectrumLimit = 1.5e6;

std::string shape(const CMatrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

bool is_identity(const CMatrix& B) {
  if (B.rows() != B.cols()) {
    return false;
  }
  return (B - CMatrix::Identity(B.rows(), B.cols())).cwiseAbs().maxCoeff() == 0.0;
}

struct Extremes {
  double max = 0.0;
  double min = 0.0;
  double min_nonzero = 0.0;
};

// Extremes of a list of singular values; `count` is the number of columns of the
// assembled matrix (missing entries are zeros, so a wide F has sigma_min = 0).
Extremes extremes_of(std::vector<double> s, Index count, Index rows, Index cols) {
  Extremes e;
  if (s.empty()) {
    return e;
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  e.max = s.front();
  const bool padded = static_cast<Index>(s.size()) < count;
  e.min = padded ? 0.0 : s.back();
  const double tol = rank_threshold(rows, cols, e.max);
  e.min_nonzero = 0.0;
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    if (*it > tol) {
      e.min_nonzero = *it;
      break;
    }
  }
  return e;
}

struct GramExtremes {
  double top = 0.0;
  double bottom = 0.0;
};

// Extreme eigenvalues of a Hermitian PSD map by Lanczos with full
// reorthogonalization. Stops once the residual bound of each extreme Ritz value
// is below rel_tol times that value (exact after rows * cols steps).
template <class Map>
GramExtremes lanczos_extremes(const Map& gram, Index rows, Index cols, double rel_tol) {
  const Index n = rows * cols;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  CVector q(n);
  for (Index j = 0; j < n; ++j) {
    q(j) = Complex(g(rng), g(rng));
  }
  q.normalize();
  std::vector<CVector> basis;
  std::vector<double> alpha, beta;
  Index next_check = 8;
  for (Index m = 1;; ++m) {
    basis.push_back(q);
    const CMatrix w_mat = gram(Eigen::Map<const CMatrix>(q.data(), rows, cols));
    CVector w = Eigen::Map<const CVector>(w_mat.data(), n);
    alpha.push_back(q.dot(w).real());
    for (int pass = 0; pass < 2; ++pass) {
      for (const CVector& v : basis) {
        w -= v * v.dot(w);
      }
    }
    const double b = w.norm();
    if (m < next_check && m < n && b > 0.0) {
      beta.push_back(b);
      q = w / b;
      continue;
    }
    next_check = m + std::max<Index>(8, m / 8);
    RVector diag = Eigen::Map<const RVector>(alpha.data(), m);
    RVector sub = m > 1 ? RVector(Eigen::Map<const RVector>(beta.data(), m - 1)) : RVector();
    Eigen::SelfAdjointEigenSolver<RMatrix> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const RVector& theta = es.eigenvalues();
    GramExtremes e{theta(m - 1), std::max(theta(0), 0.0)};
    const double res_top = b * std::abs(es.eigenvectors()(m - 1, m - 1));
    const double res_bottom = b * std::abs(es.eigenvectors()(m - 1, 0));
    const double floor = std::numeric_limits<double>::epsilon() * static_cast<double>(n) * e.top;
    if (m >= n || b <= floor ||
        (res_top <= rel_tol * e.top && res_bottom <= rel_tol * std::max(e.bottom, floor))) {
      return e;
    }
    beta.push_back(b);
    q = w / b;
  }
}

}  // namespace

const char* to_string(MixingCase c) {
  switch (c) {
    case MixingCase::General:
      return "general";
    case MixingCase::TimeInvariant:
      return "time-invariant";
    case MixingCase::SnapshotSelectors:
      return "snapshot-selectors";
  }
  return "unknown";
}

MixingOperator MixingOperator::general(std::vector<MixingComponent> components) {
  if (components.empty()) {
    throw DimensionError("mixing operator needs at least one component");
  }
  MixingOperator op;
  op.case_ = MixingCase::General;
  op.m1_ = components.front().A.rows();
  op.n_ = components.front().A.cols();
  op.i_ = components.front().B.rows();
  op.m2_ = components.front().B.cols();
  for (auto& c : components) {
    require_shape(c.A.rows() == op.m1_ && c.A.cols() == op.n_,
                  "spatial mixer shape " + shape(c.A) + " differs from first component");
    require_shape(c.B.rows() == op.i_ && c.B.cols() == op.m2_,
                  "temporal mixer shape " + shape(c.B) + " differs from first component");
    op.a_.push_back(std::move(c.A));
    op.b_.push_back(std::move(c.B));
  }
  return op;
}

MixingOperator MixingOperator::time_invariant(CMatrix A, CMatrix B) {
  MixingOperator op;
  op.case_ = MixingCase::TimeInvariant;
  op.m1_ = A.rows();
  op.n_ = A.cols();
  op.i_ = B.rows();
  op.m2_ = B.cols();
  op.identity_b_ = is_identity(B);
  op.a_.push_back(std::move(A));
  op.b_.push_back(std::move(B));
  return op;
}

MixingOperator MixingOperator::snapshot_selectors(std::vector<CMatrix> A) {
  if (A.empty()) {
    throw DimensionError("selector operator needs at least one snapshot");
  }
  MixingOperator op;
  op.case_ = MixingCase::SnapshotSelectors;
  op.m1_ = A.front().rows();
  op.n_ = A.front().cols();
  op.i_ = static_cast<Index>(A.size());
  op.m2_ = op.i_;
  for (const auto& a : A) {
    require_shape(a.rows() == op.m1_ && a.cols() == op.n_,
                  "spatial mixer shape " + shape(a) + " differs from first snapshot");
  }
  op.a_ = std::move(A);
  return op;
}

MixingOperator MixingOperator::identity(Index n, Index snapshots) {
  return time_invariant(CMatrix::Identity(n, n), CMatrix::Identity(snapshots, snapshots));
}

CMatrix MixingOperator::temporal(Index k) const {
  if (case_ != MixingCase::SnapshotSelectors) {
    return b_.at(static_cast<size_t>(k));
  }
  if (k < 0 || k >= i_) {
    throw DimensionError("component index out of range");
  }
  CMatrix B = CMatrix::Zero(i_, m2_);
  B(k, k) = 1.0;
  return B;
}

bool MixingOperator::snapshots_independent() const {
  return case_ == MixingCase::SnapshotSelectors ||
         (case_ == MixingCase::TimeInvariant && identity_b_);
}

void MixingOperator::check_input(const CMatrix& X) const {
  require_shape(X.rows() == n_ && X.cols() == i_,
                "operator input must be " + std::to_string(n_) + "x" + std::to_string(i_) +
                    ", got " + shape(X));
}

void MixingOperator::check_output(const CMatrix& Y) const {
  require_shape(Y.rows() == m1_ && Y.cols() == m2_,
                "operator output must be " + std::to_string(m1_) + "x" + std::to_string(m2_) +
                    ", got " + shape(Y));
}

CMatrix MixingOperator::apply(const CMatrix& X) const {
  check_input(X);
  switch (case_) {
    case MixingCase::TimeInvariant:
      if (identity_b_) {
        return a_[0] * X;
      }
      return (a_[0] * X) * b_[0];
    case MixingCase::SnapshotSelectors: {
      CMatrix Y(m1_, m2_);
      for (Index k = 0; k < i_; ++k) {
        Y.col(k).noalias() = a_[static_cast<size_t>(k)] * X.col(k);
      }
      return Y;
    }
    case MixingCase::General:
      break;
  }
  CMatrix Y = CMatrix::Zero(m1_, m2_);
  for (size_t k = 0; k < a_.size(); ++k) {
    Y.noalias() += (a_[k] * X) * b_[k];
  }
  return Y;
}

CMatrix MixingOperator::adjoint(const CMatrix& Y) const {
  check_output(Y);
  switch (case_) {
    case MixingCase::TimeInvariant:
      if (identity_b_) {
        return a_[0].adjoint() * Y;
      }
      return (a_[0].adjoint() * Y) * b_[0].adjoint();
    case MixingCase::SnapshotSelectors: {
      CMatrix X(n_, i_);
      for (Index k = 0; k < i_; ++k) {
        X.col(k).noalias() = a_[static_cast<size_t>(k)].adjoint() * Y.col(k);
      }
      return X;
    }
    case MixingCase::General:
      break;
  }
  CMatrix X = CMatrix::Zero(n_, i_);
  for (size_t k = 0; k < a_.size(); ++k) {
    X.noalias() += (a_[k].adjoint() * Y) * b_[k].adjoint();
  }
  return X;
}

OperatorBlock MixingOperator::block(Index i) const {
  if (i < 0 || i >= i_) {
    throw DimensionError("snapshot index " + std::to_string(i) + " out of range [0, " +
                         std::to_string(i_) + ")");
  }
  OperatorBlock blk;
  blk.index = i;
  blk.F = CMatrix::Zero(m1_ * m2_, n_);
  if (case_ == MixingCase::SnapshotSelectors) {
    blk.F.middleRows(i * m1_, m1_) = a_[static_cast<size_t>(i)];
    return blk;
  }
  // F_i = sum_k b_{k,i:}^T (x) A_k; row block m holds b_k(i, m) * A_k.
  for (size_t k = 0; k < a_.size(); ++k) {
    for (Index m = 0; m < m2_; ++m) {
      const Complex w = b_[k](i, m);
      if (w != Complex(0.0)) {
        blk.F.middleRows(m * m1_, m1_) += w * a_[k];
      }
    }
  }
  return blk;
}

CMatrix MixingOperator::assemble() const {
  CMatrix F(m1_ * m2_, n_ * i_);
  for (Index i = 0; i < i_; ++i) {
    F.middleCols(i * n_, n_) = block(i).F;
  }
  return F;
}

std::vector<CMatrix> MixingOperator::temporal_row_grams() const {
  const Index K = diversity();
  std::vector<CMatrix> grams(static_cast<size_t>(i_), CMatrix(K, K));
  for (Index i = 0; i < i_; ++i) {
    CMatrix rows(m2_, K);
    for (Index k = 0; k < K; ++k) {
      rows.col(k) = b_[static_cast<size_t>(k)].row(i).transpose();
    }
    grams[static_cast<size_t>(i)] = rows.adjoint() * rows;
  }
  return grams;
}

RMatrix MixingOperator::column_energy() const {
  RMatrix E(n_, i_);
  switch (case_) {
    case MixingCase::TimeInvariant: {
      const RVector a2 = a_[0].colwise().squaredNorm().transpose();
      const RVector b2 = identity_b_ ? RVector::Ones(i_) : RVector(b_[0].rowwise().squaredNorm());
      return a2 * b2.transpose();
    }
    case MixingCase::SnapshotSelectors:
      for (Index i = 0; i < i_; ++i) {
        E.col(i) = a_[static_cast<size_t>(i)].colwise().squaredNorm().transpose();
      }
      return E;
    case MixingCase::General:
      break;
  }
  const Index K = diversity();
  const auto grams = temporal_row_grams();
  for (Index n = 0; n < n_; ++n) {
    CMatrix cols(m1_, K);
    for (Index k = 0; k < K; ++k) {
      cols.col(k) = a_[static_cast<size_t>(k)].col(n);
    }
    const CMatrix ga = cols.adjoint() * cols;
    for (Index i = 0; i < i_; ++i) {
      E(n, i) = (ga.array() * grams[static_cast<size_t>(i)].array()).real().sum();
    }
  }
  return E;
}

RMatrix MixingOperator::block_energy(const CMatrix& D) const {
  require_shape(D.rows() == n_, "dictionary must have " + std::to_string(n_) + " rows");
  const Index P = D.cols();
  RMatrix E(P, i_);
  switch (case_) {
    case MixingCase::TimeInvariant: {
      const RVector ad2 = (a_[0] * D).colwise().squaredNorm().transpose();
      const RVector b2 = identity_b_ ? RVector::Ones(i_) : RVector(b_[0].rowwise().squaredNorm());
      return ad2 * b2.transpose();
    }
    case MixingCase::SnapshotSelectors:
      for (Index i = 0; i < i_; ++i) {
        E.col(i) = (a_[static_cast<size_t>(i)] * D).colwise().squaredNorm().transpose();
      }
      return E;
    case MixingCase::General:
      break;
  }
  const Index K = diversity();
  const auto grams = temporal_row_grams();
  for (Index p = 0; p < P; ++p) {
    CMatrix w(m1_, K);
    for (Index k = 0; k < K; ++k) {
      w.col(k) = a_[static_cast<size_t>(k)] * D.col(p);
    }
    const CMatrix gw = w.adjoint() * w;
    for (Index i = 0; i < i_; ++i) {
      E(p, i) = (gw.array() * grams[static_cast<size_t>(i)].array()).real().sum();
    }
  }
  return E;
}

SpectralBounds MixingOperator::spectral_bounds() const {
  const Index rows = m1_ * m2_;
  const Index cols = n_ * i_;
  const Index count = cols;
  std::vector<double> s;
  switch (case_) {
    case MixingCase::TimeInvariant: {
      const RVector sa = singular_values(a_[0]);
      const RVector sb = singular_values(b_[0]);
      for (Index x = 0; x < sa.size(); ++x) {
        for (Index y = 0; y < sb.size(); ++y) {
          s.push_back(sa(x) * sb(y));
        }
      }
      break;
    }
    case MixingCase::SnapshotSelectors:
      for (const auto& a : a_) {
        const RVector sa = singular_values(a);
        s.insert(s.end(), sa.data(), sa.data() + sa.size());
      }
      break;
    case MixingCase::General: {
      if (static_cast<double>(rows) * static_cast<double>(cols) <= kDenseSpectrumLimit) {
        const RVector sf = singular_values(assemble());
        s.assign(sf.data(), sf.data() + sf.size());
        break;
      }
      auto gram = [this](const CMatrix& v) { return adjoint(apply(v)); };
      const GramExtremes ext = lanczos_extremes(gram, n_, i_, 1e-10);
      const double smax = std::sqrt(ext.top);
      const double smin = rows < cols ? 0.0 : std::sqrt(ext.bottom);
      SpectralBounds b{smax, smin, smin};
      if (smin <= rank_threshold(rows, cols, smax)) {
        // Rank-deficient large operator: the smallest nonzero value needs a full SVD.
        const auto e = extremes_of(
            [&] {
              const RVector sf = singular_values(assemble());
              return std::vector<double>(sf.data(), sf.data() + sf.size());
            }(),
            count, rows, cols);
        b.sigma_min_nonzero = e.min_nonzero;
      }
      return b;
    }
  }
  const auto e = extremes_of(std::move(s), count, rows, cols);
  return {e.max, e.min, e.min_nonzero};
}

RVector singular_values(const CMatrix& M) {
  if (M.size() == 0) {
    return RVector();
  }
  Eigen::BDCSVD<CMatrix> svd(M);
  return svd.singularValues();
}

double rank_threshold(Index rows, Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() *
         sigma_max;
}

}  // namespace prdl
