// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#include "gpkmd/init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace gpkmd::init {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Index of the conjugate partner of eigenvalue i (distinct j with
// lambda_j ~ conj(lambda_i)), or -1.
Index conjugate_partner(const CVector& eigs, Index i) {
  const Complex target = std::conj(eigs[i]);
  if (std::abs(eigs[i].imag()) < 1e-12 * (1.0 + std::abs(eigs[i])))
    return -1; // real eigenvalue is its own partner
  for (Index j = 0; j < eigs.size(); ++j) {
    if (j == i) continue;
    if (std::abs(eigs[j] - target) < 1e-8 * (1.0 + std::abs(target)))
      return j;
  }
  return -1;
}

// Top-k selection by |amplitude|, keeping conjugate pairs together: when a
// selected eigenvalue's partner would fall outside the cut, the partner is
// pulled in and the next-ranked candidate dropped.
std::vector<Index> select_top_k(const CVector& eigs, const CVector& amps,
                                Index k) {
  std::vector<Index> order(static_cast<std::size_t>(eigs.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(amps[a]) > std::abs(amps[b]);
  });
  std::vector<bool> taken(static_cast<std::size_t>(eigs.size()), false);
  std::vector<Index> sel;
  for (Index idx : order) {
    if (static_cast<Index>(sel.size()) >= k) break;
    if (taken[static_cast<std::size_t>(idx)]) continue;
    sel.push_back(idx);
    taken[static_cast<std::size_t>(idx)] = true;
    const Index partner = conjugate_partner(eigs, idx);
    if (partner >= 0 && !taken[static_cast<std::size_t>(partner)] &&
        static_cast<Index>(sel.size()) < k) {
      sel.push_back(partner);
      taken[static_cast<std::size_t>(partner)] = true;
    }
  }
  return sel;
}

} // namespace

LatentTrajectory pca_latents(const ObservationMatrix& y, Index p) {
  const Index d = y.rows();
  const Index t = y.cols();
  require(p >= 1 && p <= std::min(d, t), "pca_latents: need 1 <= p <= min(D,T)");

  Matrix stacked(2 * d, t);
  stacked.topRows(d) = y.real();
  stacked.bottomRows(d) = y.imag();
  stacked.colwise() -= stacked.rowwise().mean();

  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU |
                                            Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();

  // Leading block of numerically tied singular values (chained 5%
  // tolerance). Within such a block the SVD's choice of directions is
  // arbitrary, so the raw scores can come out as an unpredictable mixture;
  // we break the tie deterministically in favor of the temporally
  // smoothest directions, which also keeps the score covariance diagonal.
  Index block = 1;
  while (block < sv.size() && sv[block] >= 0.95 * sv[block - 1]) ++block;

  Matrix scores;
  if (block <= p) {
    scores = sv.head(p).asDiagonal() *
             svd.matrixV().leftCols(p).transpose(); // p x t
  } else {
    const Matrix sb = sv.head(block).asDiagonal() *
                      svd.matrixV().leftCols(block).transpose(); // block x t
    const Matrix diff = sb.rightCols(t - 1) - sb.leftCols(t - 1);
    const Matrix rough = diff * diff.transpose(); // block x block
    // Generalized problem rough*c = mu*diag(sv^2)*c: minimizing directions
    // are diag(sv^2)-orthogonal, so the selected score rows stay
    // uncorrelated.
    const Vector binv = sv.head(block).cwiseInverse();
    Eigen::SelfAdjointEigenSolver<Matrix> es(binv.asDiagonal() * rough *
                                             binv.asDiagonal());
    const double scale = std::sqrt(sv.head(block).squaredNorm() /
                                   static_cast<double>(block));
    const Matrix c = scale * binv.asDiagonal() * es.eigenvectors().leftCols(p);
    scores = c.transpose() * sb; // p x t
  }

  LatentTrajectory x(p, t + 1);
  x.rightCols(t) = scores;
  x.col(0) = scores.col(0);
  return x;
}

DmdResult dmd(const ObservationMatrix& y, Index k) {
  const Index d = y.rows();
  const Index t = y.cols();
  require(t >= 2, "dmd: need T >= 2");
  require(k >= 1 && k <= std::min(d, t - 1),
          "dmd: need 1 <= k <= min(D, T-1)");

  const CMatrix y0 = y.leftCols(t - 1);
  const CMatrix y1 = y.rightCols(t - 1);

  Eigen::JacobiSVD<CMatrix> svd(y0, Eigen::ComputeThinU |
                                        Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv[rank] > 1e-10 * sv[0]) ++rank;
  if (k > rank)
    throw std::invalid_argument("dmd: k exceeds numerical rank of Y0");

  const CMatrix u = svd.matrixU().leftCols(rank);
  const CMatrix v = svd.matrixV().leftCols(rank);
  const Vector s = sv.head(rank);
  const CMatrix y1vs = y1 * v * s.cwiseInverse().asDiagonal(); // D x r
  const CMatrix a_tilde = u.adjoint() * y1vs;

  Eigen::ComplexEigenSolver<CMatrix> eig(a_tilde);
  const CVector evals = eig.eigenvalues();
  // Exact-DMD modes: Y1 V S^{-1} eigvecs, rescaled to unit norm so that
  // |amplitude| measures each mode's actual contribution (raw exact-DMD
  // mode norms scale with |lambda|, which inflates amplitudes of noise
  // modes with near-zero eigenvalues).
  CMatrix all_modes = y1vs * eig.eigenvectors();
  for (Index j = 0; j < all_modes.cols(); ++j) {
    const double nrm = all_modes.col(j).norm();
    if (nrm > 0.0) all_modes.col(j) /= nrm;
  }

  // Initial-condition amplitudes over the full rank-r set.
  const CVector amps = all_modes.colPivHouseholderQr().solve(y.col(0));

  const std::vector<Index> sel = select_top_k(evals, amps, k);
  DmdResult res;
  res.eigenvalues.resize(k);
  res.modes.resize(d, k);
  res.amplitudes.resize(k);
  for (Index j = 0; j < k; ++j) {
    const Index idx = sel[static_cast<std::size_t>(j)];
    res.eigenvalues[j] = evals[idx];
    res.modes.col(j) = all_modes.col(idx);
    res.amplitudes[j] = amps[idx];
  }
  return res;
}

CVector to_continuous(const model::KoopmanSpectrum& spec) {
  require(spec.dt > 0.0, "to_continuous: dt must be > 0");
  CVector out(spec.discrete.size());
  for (Index i = 0; i < out.size(); ++i) {
    if (spec.discrete[i] == Complex(0.0, 0.0))
      throw std::invalid_argument("to_continuous: zero eigenvalue");
    out[i] = std::log(spec.discrete[i]) / spec.dt;
  }
  return out;
}

} // namespace gpkmd::init
