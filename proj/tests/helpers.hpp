// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef GPKMD_TESTS_HELPERS_HPP
#define GPKMD_TESTS_HELPERS_HPP

#include <random>

#include "gpkmd/kron.hpp"
#include "gpkmd/model.hpp"

namespace gpkmd::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index r, Index c,
                            double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = n(rng);
  return m;
}

inline CMatrix random_cmatrix(std::mt19937_64& rng, Index r, Index c,
                              double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  CMatrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

struct Instance {
  ObservationMatrix y;
  model::GpkmdParams params;
  kernels::KernelSpec kernel;
  model::PriorSpec prior;
};

/// A well-conditioned random problem small enough for dense oracles.
inline Instance random_instance(std::mt19937_64& rng, Index d, Index t,
                                Index k, Index p = 2) {
  Instance inst;
  inst.y = random_cmatrix(rng, d, t);
  inst.params.latents = random_matrix(rng, p, t + 1);
  inst.params.modes = random_cmatrix(rng, d, k, 0.7);
  inst.params.eigenvalues.dt = 0.1;
  inst.params.eigenvalues.discrete.resize(k);
  std::uniform_real_distribution<double> mag(0.6, 1.1), ang(-1.5, 1.5);
  for (Index i = 0; i < k; ++i)
    inst.params.eigenvalues.discrete[i] =
        mag(rng) * std::exp(Complex(0.0, ang(rng)));
  inst.params.noise_var = 0.4;
  inst.params.coef_var = 0.8;
  inst.kernel = kernels::KernelSpec::rbf_plus_linear(1.0, 1.3, 0.3);
  return inst;
}

/// Dense covariance sigma^2 I + sigma_b^2 (G (x) H); oracle use only.
inline CMatrix dense_cov(double noise_var, double signal_var, const Matrix& g,
                         const CMatrix& h) {
  CMatrix cov = signal_var * kron::kron_dense(g.cast<Complex>().eval(), h);
  cov.diagonal().array() += noise_var;
  return cov;
}

/// log CN(v | 0, cov) evaluated with a dense LU factorization, written
/// independently of the library's likelihood code.
inline double dense_cn_logpdf(const CVector& v, const CMatrix& cov) {
  Eigen::PartialPivLU<CMatrix> lu(cov);
  double logdet = 0.0;
  for (Index i = 0; i < cov.rows(); ++i)
    logdet += std::log(std::abs(lu.matrixLU()(i, i)));
  const double quad = std::real(v.dot(lu.solve(v)));
  return -static_cast<double>(cov.rows()) * std::log(std::acos(-1.0)) -
         logdet - quad;
}

} // namespace gpkmd::testing

#endif
