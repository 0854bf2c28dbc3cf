// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef GPKMD_MODEL_HPP
#define GPKMD_MODEL_HPP

#include <utility>

#include "gpkmd/kernels.hpp"
#include "gpkmd/kron.hpp"
#include "gpkmd/types.hpp"

namespace gpkmd::model {

/// Discrete-time Koopman spectrum (diagonal of Lambda) with its sampling
/// interval.
struct KoopmanSpectrum {
  CVector discrete; // length K
  double dt = 1.0;
};

/// Full parameter set of the generative model.
struct GpkmdParams {
  LatentTrajectory latents; // P x (T+1), columns x_0 ... x_T
  ModeMatrix modes;         // D x K
  KoopmanSpectrum eigenvalues;
  double noise_var = 1.0; // sigma^2
  double coef_var = 1.0;  // sigma_b^2

  Index latent_dim() const { return latents.rows(); }
  Index num_modes() const { return modes.cols(); }
  void validate() const;
};

/// Hyperparameters of the priors: GPDM prior on the latents, complex
/// normal priors on modes and eigenvalues, inverse-gamma on the variances.
struct PriorSpec {
  double latent_scale = 1.0; // s_x^2
  kernels::KernelSpec latent_kernel = kernels::KernelSpec::rbf_plus_linear();
  double mode_scale = 1.0;  // s_w^2
  double eig_scale = 1.0;   // s_lambda^2
  double noise_shape = 1e-3, noise_rate = 1e-3; // alpha, beta
  double coef_shape = 1e-3, coef_rate = 1e-3;   // alpha_b, beta_b

  void validate() const;
};

/// Sum of the two complex-normal log densities with dense DT x DT
/// covariances. Reference path; intended for D*T up to a few hundred.
double log_likelihood_naive(const ObservationMatrix& y,
                            const GpkmdParams& params,
                            const kernels::KernelSpec& kernel);

/// Same quantity through the low-rank Woodbury path. rank_s >= T gives the
/// exact value (per-term eigendecomposition); rank_s < T substitutes the
/// Nystrom approximation of both Gram matrices, built on landmark points
/// taken by uniform stride over x_0 ... x_T unless explicit landmark
/// coordinates (P x S) are supplied.
double log_likelihood_fast(const ObservationMatrix& y,
                           const GpkmdParams& params,
                           const kernels::KernelSpec& kernel, Index rank_s,
                           const Matrix* landmark_points = nullptr);

double log_prior(const GpkmdParams& params, const PriorSpec& prior);

double log_posterior(const ObservationMatrix& y, const GpkmdParams& params,
                     const kernels::KernelSpec& kernel, const PriorSpec& prior,
                     Index rank_s, const Matrix* landmark_points = nullptr);

/// Log posterior with every gradient, sharing one set of factorizations.
struct Evaluation {
  double log_posterior = 0.0;
  Matrix d_latents;      // P x (T+1)
  CMatrix d_modes;       // D x K, complex gradient d/dRe + i d/dIm
  CVector d_eigenvalues; // length K, same convention
  double d_log_noise = 0.0; // d/d log sigma^2
  double d_log_coef = 0.0;  // d/d log sigma_b^2
};

Evaluation evaluate(const ObservationMatrix& y, const GpkmdParams& params,
                    const kernels::KernelSpec& kernel, const PriorSpec& prior,
                    Index rank_s, const Matrix* landmark_points = nullptr);

Matrix grad_latents(const ObservationMatrix& y, const GpkmdParams& params,
                    const kernels::KernelSpec& kernel, const PriorSpec& prior,
                    Index rank_s);

CMatrix grad_modes(const ObservationMatrix& y, const GpkmdParams& params,
                   const kernels::KernelSpec& kernel, const PriorSpec& prior,
                   Index rank_s);

/// (d/d log sigma^2, d/d log sigma_b^2) of the log posterior.
std::pair<double, double> grad_variances(const ObservationMatrix& y,
                                         const GpkmdParams& params,
                                         const kernels::KernelSpec& kernel,
                                         const PriorSpec& prior, Index rank_s);

CVector grad_eigenvalues(const ObservationMatrix& y, const GpkmdParams& params,
                         const kernels::KernelSpec& kernel,
                         const PriorSpec& prior, Index rank_s);

} // namespace gpkmd::model

#endif
