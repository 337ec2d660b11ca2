#pragma once

#include <vector>

#include "prdl/types.hpp"

namespace prdl {

enum class MixingCase {
  General,            // F(X) = sum_k A_k X B_k
  TimeInvariant,      // K = 1, F(X) = A X B
  SnapshotSelectors,  // K = I, B_k selects snapshot k
};

const char* to_string(MixingCase c);

struct MixingComponent {
  CMatrix A;  // M1 x N
  CMatrix B;  // I x M2
};

// i-th column block of the vectorized operator F = sum_k B_k^T (x) A_k.
struct OperatorBlock {
  Index index = 0;
  CMatrix F;  // (M1*M2) x N
};

// sigma_min is the square root of the smallest eigenvalue of F^H F, so it is
// zero whenever M1 M2 < N I.
struct SpectralBounds {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double sigma_min_nonzero = 0.0;
};

// Structured linear map C^{N x I} -> C^{M1 x M2}.
//
// Snapshot indices are zero-based throughout. Values are immutable after
// construction. For SnapshotSelectors the selector matrices B_k are never
// stored; only the per-snapshot spatial mixers A_k are kept.
class MixingOperator {
public:
  MixingOperator() = default;

  static MixingOperator general(std::vector<MixingComponent> components);
  static MixingOperator time_invariant(CMatrix A, CMatrix B);
  static MixingOperator snapshot_selectors(std::vector<CMatrix> A);
  static MixingOperator identity(Index n, Index snapshots);

  MixingCase mixing_case() const { return case_; }
  Index diversity() const { return static_cast<Index>(a_.size()); }
  Index out_rows() const { return m1_; }
  Index out_cols() const { return m2_; }
  Index signal_rows() const { return n_; }
  Index snapshots() const { return i_; }

  const CMatrix& spatial(Index k) const { return a_.at(static_cast<size_t>(k)); }
  // Temporal mixer B_k; synthesized for the selector case.
  CMatrix temporal(Index k) const;
  // True when K = 1 and B is the identity (no temporal mixing).
  bool temporal_is_identity() const { return identity_b_; }
  // True when snapshots are measured independently (Case 1 and Case 3).
  bool snapshots_independent() const;

  CMatrix apply(const CMatrix& X) const;
  CMatrix adjoint(const CMatrix& Y) const;

  OperatorBlock block(Index i) const;
  // Dense F of size (M1*M2) x (N*I); intended for small instances and oracles.
  CMatrix assemble() const;

  // ||f_{n + i N}||^2 for every column of F, arranged as an N x I matrix.
  RMatrix column_energy() const;
  // ||F_i d_p||^2 for every atom p and snapshot i, arranged as a P x I matrix.
  RMatrix block_energy(const CMatrix& D) const;

  SpectralBounds spectral_bounds() const;

private:
  void check_input(const CMatrix& X) const;
  void check_output(const CMatrix& Y) const;
  // Gram of temporal rows: G_i(k, k') = b_{k,i:}^H b_{k',i:}; general case only.
  std::vector<CMatrix> temporal_row_grams() const;

  MixingCase case_ = MixingCase::General;
  std::vector<CMatrix> a_;
  std::vector<CMatrix> b_;
  bool identity_b_ = false;
  Index m1_ = 0, m2_ = 0, n_ = 0, i_ = 0;
};

// Dense singular values of an arbitrary matrix, descending.
RVector singular_values(const CMatrix& M);

// Numerical-rank threshold max(rows, cols) * eps * sigma_max.
double rank_threshold(Index rows, Index cols, double sigma_max);

}  // namespace prdl
