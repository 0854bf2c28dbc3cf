// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef GPKMD_OPTIMIZE_HPP
#define GPKMD_OPTIMIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gpkmd/model.hpp"

namespace gpkmd::opt {

struct FitConfig {
  int max_iters = 500;
  double grad_tol = 1e-5;     // on the max-abs gradient entry
  int restart_period = 0;     // 0 -> parameter count
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  int max_line_steps = 40;
  int landmark_refresh = 25; // iterations between Nystrom landmark refreshes
  Index rank_s = 0;          // 0 -> exact (rank T)
  std::uint64_t seed = 0;
  int verbose = 0;

  void validate() const;
};

enum class FitStatus { Converged, MaxIters, LineSearchFailed };

std::string to_string(FitStatus s);

struct FitTrace {
  struct Row {
    int iter;
    double log_posterior;
    double grad_norm; // max-abs entry
    double step;
    double seconds;   // cumulative wall time
  };
  std::vector<Row> rows;
};

struct FitResult {
  model::GpkmdParams params;
  FitTrace trace;
  FitStatus status = FitStatus::MaxIters;
  double log_posterior = 0.0;
};

/// MAP estimation by Polak-Ribiere+ nonlinear conjugate gradient with
/// Armijo backtracking. Optimized variables: all latent coordinates,
/// Re/Im of all modes, |lambda_k| (angles frozen at their initial values),
/// log sigma^2 and log sigma_b^2. Accepted steps never decrease the
/// posterior under the landmark set active at the time.
FitResult map_fit(const ObservationMatrix& y,
                  const model::GpkmdParams& init_params,
                  const kernels::KernelSpec& kernel,
                  const model::PriorSpec& prior, const FitConfig& config);

/// Multi-start wrapper: `restarts` fits with seed-perturbed latents
/// (Gaussian jitter 0.01), run concurrently, merged by best posterior.
FitResult map_fit_restarts(const ObservationMatrix& y,
                           const model::GpkmdParams& init_params,
                           const kernels::KernelSpec& kernel,
                           const model::PriorSpec& prior,
                           const FitConfig& config, int restarts);

} // namespace gpkmd::opt

#endif
