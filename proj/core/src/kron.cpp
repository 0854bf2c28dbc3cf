// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#include "gpkmd/kron.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gpkmd {

namespace {
thread_local std::size_t ws_current = 0;
thread_local std::size_t ws_peak = 0;
} // namespace

Workspace::Scope::Scope(std::size_t elements) : elements_(elements) {
  ws_current += elements_;
  ws_peak = std::max(ws_peak, ws_current);
}

Workspace::Scope::~Scope() { ws_current -= elements_; }

void Workspace::reset() {
  ws_current = 0;
  ws_peak = 0;
}

std::size_t Workspace::current_elements() { return ws_current; }
std::size_t Workspace::peak_elements() { return ws_peak; }

} // namespace gpkmd

namespace gpkmd::kron {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Sorts (value, column) pairs of an eigen/SVD result descending by value.
struct DescendingOrder {
  std::vector<Index> perm;
  explicit DescendingOrder(const Vector& vals) : perm(vals.size()) {
    std::iota(perm.begin(), perm.end(), Index{0});
    std::sort(perm.begin(), perm.end(),
              [&](Index a, Index b) { return vals[a] > vals[b]; });
  }
};

} // namespace

CMatrix LowRankFactor::reconstruct() const {
  return u * sigma.array().square().matrix().asDiagonal() * u.adjoint();
}

LowRankFactor LowRankFactor::from_matrix(const CMatrix& m, double rel_tol) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU);
  const Vector sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rel_tol * sv[0] : 0.0;
  Index r = 0;
  while (r < sv.size() && sv[r] > cutoff) ++r;
  if (rel_tol <= 0.0) r = sv.size(); // keep the full thin factor
  LowRankFactor f;
  f.u = svd.matrixU().leftCols(r);
  f.sigma = sv.head(r);
  return f;
}

LowRankFactor LowRankFactor::from_psd(const Matrix& m, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  Vector vals = eig.eigenvalues();
  const double vmax = vals.size() > 0 ? vals.maxCoeff() : 0.0;
  const double cutoff = std::max(0.0, rel_tol * vmax);
  DescendingOrder order(vals);
  Index r = 0;
  while (r < vals.size() && vals[order.perm[r]] > cutoff) ++r;
  LowRankFactor f;
  f.u.resize(m.rows(), r);
  f.sigma.resize(r);
  for (Index j = 0; j < r; ++j) {
    f.u.col(j) = eig.eigenvectors().col(order.perm[j]).cast<Complex>();
    f.sigma[j] = std::sqrt(vals[order.perm[j]]);
  }
  return f;
}

StegleDecomposition StegleDecomposition::from(const Matrix& k1,
                                              const CMatrix& w) {
  StegleDecomposition s;
  Eigen::SelfAdjointEigenSolver<Matrix> ek(k1);
  s.u_k = ek.eigenvectors();
  s.s_k = ek.eigenvalues();
  Eigen::SelfAdjointEigenSolver<CMatrix> ew(CMatrix(w * w.adjoint()));
  s.u_w = ew.eigenvectors();
  s.s_w = ew.eigenvalues();
  return s;
}

CMatrix kron_dense(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kron_dense(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

bool kron_identities_check(const CMatrix& a, const CMatrix& b,
                           const CMatrix& c, const CMatrix& d) {
  require(a.cols() == c.rows(), "kron_identities_check: A, C not conformable");
  require(b.cols() == d.rows(), "kron_identities_check: B, D not conformable");
  require(b.rows() == a.cols() && c.rows() == b.cols(),
          "kron_identities_check: A B C chain not conformable");
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "kron_identities_check: vec/trace identity needs same-shape A, B");
  const double tol = 1e-10;

  // (A (x) B)(C (x) D) = (AC) (x) (BD)
  const CMatrix lhs1 = kron_dense(a, b) * kron_dense(c, d);
  const CMatrix rhs1 = kron_dense(CMatrix(a * c), CMatrix(b * d));
  if ((lhs1 - rhs1).norm() > tol * std::max(1.0, rhs1.norm())) return false;

  // vec(A B C) = (C^T (x) A) vec(B)
  const CVector lhs2 = vec(a * b * c);
  const CVector rhs2 = kron_dense(CMatrix(c.transpose()), a) * vec(b);
  if ((lhs2 - rhs2).norm() > tol * std::max(1.0, rhs2.norm())) return false;

  // tr(A (x) B) = tr(A) tr(B), square operands only
  if (a.rows() == a.cols() && b.rows() == b.cols()) {
    const Complex lhs3 = kron_dense(a, b).trace();
    const Complex rhs3 = a.trace() * b.trace();
    if (std::abs(lhs3 - rhs3) > tol * std::max(1.0, std::abs(rhs3)))
      return false;
  }

  // vec(A)^* vec(B) = tr(A^* B)
  const Complex lhs4 = vec(a).adjoint() * vec(b);
  const Complex rhs4 = (a.adjoint() * b).trace();
  return std::abs(lhs4 - rhs4) <= tol * std::max(1.0, std::abs(rhs4));
}

CVector stegle_solve(const KroneckerCov& cov, const CVector& v) {
  require(cov.noise_var > 0.0, "stegle_solve: noise_var must be > 0");
  require(cov.stegle.has_value(), "stegle_solve: missing decomposition");
  const StegleDecomposition& s = *cov.stegle;
  const Index t = s.u_k.rows();
  const Index d = s.u_w.rows();
  require(v.size() == d * t, "stegle_solve: rhs size mismatch");

  // (U_K (x) U_W)^* v = vec(U_W^* V U_K), elementwise scale, map back.
  Eigen::Map<const CMatrix> vm(v.data(), d, t);
  Workspace::Scope scope(static_cast<std::size_t>(2 * d * t));
  CMatrix z = s.u_w.adjoint() * vm * s.u_k;
  for (Index j = 0; j < t; ++j)
    for (Index i = 0; i < d; ++i)
      z(i, j) /= cov.noise_var + cov.signal_var * s.s_k[j] * s.s_w[i];
  CMatrix out = s.u_w * z * s.u_k.transpose();
  return vec(out);
}

double stegle_logdet(const KroneckerCov& cov) {
  require(cov.noise_var > 0.0, "stegle_logdet: noise_var must be > 0");
  require(cov.stegle.has_value(), "stegle_logdet: missing decomposition");
  const StegleDecomposition& s = *cov.stegle;
  double acc = 0.0;
  for (Index j = 0; j < s.s_k.size(); ++j)
    for (Index i = 0; i < s.s_w.size(); ++i)
      acc += std::log(cov.noise_var + cov.signal_var * s.s_k[j] * s.s_w[i]);
  return acc;
}

LowRankFactor nystrom(const GramOracle& oracle,
                      const std::vector<Index>& landmark_indices, Index t) {
  const Index s = static_cast<Index>(landmark_indices.size());
  require(s >= 1 && s <= t, "nystrom: need 1 <= S <= T");
  {
    std::vector<Index> sorted(landmark_indices);
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "nystrom: duplicate landmark indices");
    require(sorted.front() >= 0 && sorted.back() < t,
            "nystrom: landmark index out of range");
  }

  Workspace::Scope scope(static_cast<std::size_t>(t * s + 2 * s * s));
  Matrix c(t, s); // cross Gram, T x S
  Matrix w(s, s); // landmark block
  for (Index j = 0; j < s; ++j) {
    for (Index i = 0; i < t; ++i) c(i, j) = oracle(i, landmark_indices[j]);
    for (Index i = 0; i < s; ++i)
      w(i, j) = oracle(landmark_indices[i], landmark_indices[j]);
  }

  // R = C V diag(1/sqrt(e)) over eigenpairs of W above the jitter cutoff,
  // so that R R^T = C W^+ C^T.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(w);
  const Vector evals = eig.eigenvalues();
  const double cutoff = 1e-10 * std::max(0.0, evals.maxCoeff());
  Matrix basis(s, s);
  Index r = 0;
  for (Index j = s - 1; j >= 0; --j) { // descending
    if (evals[j] <= cutoff) continue;
    basis.col(r++) = eig.eigenvectors().col(j) / std::sqrt(evals[j]);
  }
  Matrix rfac = c * basis.leftCols(r);
  return LowRankFactor::from_matrix(rfac.cast<Complex>(), 1e-14);
}

LowRankFactor incomplete_cholesky(const GramOracle& oracle, Index t,
                                  Index max_rank, double pivot_tol) {
  require(t >= 1 && max_rank >= 1, "incomplete_cholesky: bad sizes");
  Vector diag(t);
  for (Index i = 0; i < t; ++i) diag[i] = oracle(i, i);
  const double cutoff = pivot_tol * std::max(0.0, diag.maxCoeff());

  Workspace::Scope scope(static_cast<std::size_t>(t * max_rank + t));
  Matrix l = Matrix::Zero(t, max_rank);
  std::vector<Index> pivots;
  Index r = 0;
  while (r < max_rank) {
    Index piv = 0;
    double best = diag[0];
    for (Index i = 1; i < t; ++i)
      if (diag[i] > best) { best = diag[i]; piv = i; }
    if (best <= cutoff) break;
    const double root = std::sqrt(best);
    for (Index i = 0; i < t; ++i) {
      double v = oracle(i, piv);
      for (Index k = 0; k < r; ++k) v -= l(i, k) * l(piv, k);
      l(i, r) = v / root;
    }
    for (Index i = 0; i < t; ++i) diag[i] -= l(i, r) * l(i, r);
    pivots.push_back(piv);
    ++r;
  }
  return LowRankFactor::from_matrix(Matrix(l.leftCols(r)).cast<Complex>(),
                                    1e-14);
}

CVector woodbury_solve(double noise_var, double signal_var,
                       const LowRankFactor& g, const LowRankFactor& h,
                       const CVector& v) {
  require(noise_var > 0.0, "woodbury_solve: noise_var must be > 0");
  const Index t = g.rows();
  const Index d = h.rows();
  require(v.size() == d * t, "woodbury_solve: rhs size mismatch");

  Eigen::Map<const CMatrix> vm(v.data(), d, t);
  const Index sg = g.rank();
  const Index sh = h.rank();
  Workspace::Scope scope(
      static_cast<std::size_t>(d * t + 2 * sg * sh + t * sg + d * sh));
  const CMatrix ag = g.u * g.sigma.asDiagonal(); // T x sg
  const CMatrix bh = h.u * h.sigma.asDiagonal(); // D x sh
  CMatrix z = bh.adjoint() * vm * ag.conjugate(); // sh x sg
  for (Index j = 0; j < sg; ++j)
    for (Index i = 0; i < sh; ++i)
      z(i, j) /= noise_var + signal_var * g.sigma[j] * g.sigma[j] *
                                 h.sigma[i] * h.sigma[i];
  CMatrix out =
      (vm - signal_var * (bh * z * ag.transpose())) / noise_var;
  return vec(out);
}

double woodbury_logdet(double noise_var, double signal_var,
                       const LowRankFactor& g, const LowRankFactor& h,
                       Index d, Index t) {
  require(noise_var > 0.0, "woodbury_logdet: noise_var must be > 0");
  const Index sg = g.rank();
  const Index sh = h.rank();
  double acc =
      static_cast<double>(d * t - sg * sh) * std::log(noise_var);
  for (Index j = 0; j < sg; ++j)
    for (Index i = 0; i < sh; ++i)
      acc += std::log(noise_var + signal_var * g.sigma[j] * g.sigma[j] *
                                      h.sigma[i] * h.sigma[i]);
  return acc;
}

std::vector<Index> stride_landmarks(Index n, Index s) {
  require(s >= 1 && s <= n, "stride_landmarks: need 1 <= S <= N");
  std::vector<Index> out(s);
  for (Index i = 0; i < s; ++i)
    out[static_cast<std::size_t>(i)] = (i * n) / s;
  return out;
}

} // namespace gpkmd::kron
