// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef GPKMD_KRON_HPP
#define GPKMD_KRON_HPP

#include <functional>
#include <optional>
#include <vector>

#include "gpkmd/types.hpp"

namespace gpkmd::kron {

/// Rank-r factor (U, sigma) of a PSD matrix approximated as
/// U * diag(sigma)^2 * U^*, with orthonormal U columns and sigma
/// nonnegative, sorted descending.
struct LowRankFactor {
  CMatrix u;    // n x r, orthonormal columns
  Vector sigma; // length r, descending, >= 0

  Index rows() const { return u.rows(); }
  Index rank() const { return sigma.size(); }

  /// Dense reconstruction U diag(sigma^2) U^*; test/oracle use only.
  CMatrix reconstruct() const;

  /// Thin SVD of an arbitrary matrix m, keeping singular values above
  /// rel_tol * sigma_max. Represents m m^* as a LowRankFactor.
  static LowRankFactor from_matrix(const CMatrix& m, double rel_tol = 0.0);

  /// Eigendecomposition of a real symmetric PSD matrix, eigenvalues
  /// below rel_tol * max clamped to zero and dropped.
  static LowRankFactor from_psd(const Matrix& m, double rel_tol = 1e-12);
};

/// Separate eigendecompositions of the two Kronecker factors:
/// K1 = u_k diag(s_k) u_k^T and W W^* = u_w diag(s_w) u_w^*.
struct StegleDecomposition {
  Matrix u_k;  // T x T orthogonal
  Vector s_k;  // length T
  CMatrix u_w; // D x D unitary
  Vector s_w;  // length D (at most K nonzero)

  static StegleDecomposition from(const Matrix& k1, const CMatrix& w);
};

/// Covariance sigma^2 I + sigma_b^2 (G (x) H), held either as a full
/// Stegle eigendecomposition or as a low-rank factor pair.
struct KroneckerCov {
  double noise_var = 1.0;  // sigma^2, > 0
  double signal_var = 1.0; // sigma_b^2, >= 0
  std::optional<StegleDecomposition> stegle;
  std::optional<LowRankFactor> g_factor;
  std::optional<LowRankFactor> h_factor;
};

/// Dense Kronecker product; sizes are expected to be small (tests,
/// oracles, the naive likelihood).
CMatrix kron_dense(const CMatrix& a, const CMatrix& b);
Matrix kron_dense(const Matrix& a, const Matrix& b);

/// Column-major vectorization.
CVector vec(const CMatrix& m);

/// Checks the four Kronecker/vec identities
///   (A(x)B)(C(x)D) = AC (x) BD
///   vec(ABC)       = (C^T (x) A) vec(B)
///   tr(A(x)B)      = tr(A) tr(B)
///   vec(A)^* vec(B) = tr(A^* B)
/// on the given inputs, each side evaluated independently. Returns true
/// iff all residuals are below 1e-10. Throws on non-conformable shapes.
bool kron_identities_check(const CMatrix& a, const CMatrix& b,
                           const CMatrix& c, const CMatrix& d);

/// (sigma^2 I + sigma_b^2 (K1 (x) W W^*))^{-1} v via the factor
/// eigendecompositions; never materializes a DT x DT matrix.
CVector stegle_solve(const KroneckerCov& cov, const CVector& v);

/// log det(sigma^2 I + sigma_b^2 (K1 (x) W W^*)) from the eigenvalues.
double stegle_logdet(const KroneckerCov& cov);

/// Kernel-value oracle: returns k(points[i], points[j]) on demand.
using GramOracle = std::function<double(Index i, Index j)>;

/// Nystrom approximation of a T x T PSD Gram matrix from a landmark
/// subset. Returns R (as LowRankFactor after thin SVD) such that
/// R R^T approximates the Gram matrix; eigenvalues of the landmark block
/// below 1e-10 x max are clamped to zero. The full matrix is never formed.
LowRankFactor nystrom(const GramOracle& oracle,
                      const std::vector<Index>& landmark_indices, Index t);

/// Incomplete Cholesky alternative to nystrom: greedy pivoted rank
/// reduction with pivot tolerance 1e-8 (relative to the largest diagonal).
LowRankFactor incomplete_cholesky(const GramOracle& oracle, Index t,
                                  Index max_rank, double pivot_tol = 1e-8);

/// Woodbury-transformed application of
/// (sigma^2 I + sigma_b^2 (G (x) H))^{-1) to v with G = A A^T, H = B B^*
/// given by low-rank factors; only the KS-dimensional diagonal system is
/// formed.
CVector woodbury_solve(double noise_var, double signal_var,
                       const LowRankFactor& g, const LowRankFactor& h,
                       const CVector& v);

/// (DT - KS) log sigma^2 + sum log(sigma^2 + sigma_b^2 s_g[i]^2 s_h[j]^2)
/// via the Weinstein-Aronszajn identity.
double woodbury_logdet(double noise_var, double signal_var,
                       const LowRankFactor& g, const LowRankFactor& h,
                       Index d, Index t);

/// Uniform-stride landmark selection over n points (deterministic default).
std::vector<Index> stride_landmarks(Index n, Index s);

} // namespace gpkmd::kron

#endif
