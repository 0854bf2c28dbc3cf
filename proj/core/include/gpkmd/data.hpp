// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef GPKMD_DATA_HPP
#define GPKMD_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gpkmd/model.hpp"

namespace gpkmd::data {

struct StuartLandauConfig {
  double delta = 0.5;
  double beta = 1.0;
  double gamma = 1.0;
  double dt = 0.05;
  Index t_len = 751;
  double r0 = 0.05;
  double theta0 = 0.0;
  Index d = 35;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StuartLandauData {
  Matrix truth;         // 2 x T polar coordinates (r; theta)
  ObservationMatrix y;  // D x T complex observable
};

/// Discretized Stuart-Landau limit-cycle system observed through the
/// complex exponential observable y_dt = exp(i d' theta_t) + noise, with
/// the channel fold d' = d - ceil(D/2) for odd d and d' = d/2 for even d
/// (channel indices 1-based). Noise is circular complex Gaussian with
/// variance noise_std^2.
StuartLandauData stuart_landau(const StuartLandauConfig& config);

/// 1-based folded channel index d' for channel d of D (see stuart_landau).
Index sl_channel_fold(Index d, Index total);

/// Exact continuous-time eigenvalues lambda = -2 l delta + i n omega0 with
/// omega0 = gamma - beta*delta, over l in 0..l_max, n in -n_max..n_max.
CVector exact_sl_eigenvalues(double delta, double beta, double gamma,
                             Index l_max, Index n_max);

/// Euclidean norm of the real-part residuals after matching each estimated
/// continuous eigenvalue to the exact grid entry nearest in imaginary part
/// (ties broken toward the least-damped entry).
double eigenvalue_error(const CVector& estimated, const CVector& exact_grid);

struct LoadOptions {
  bool has_header = true;
  enum class Transform { None, Log, Log1p } transform = Transform::None;
  bool standardize = true; // per-channel mean 0, sd 1
};

/// Reads a real-valued CSV with rows = time and columns = channels, applies
/// the optional transform and per-channel standardization, and lifts the
/// result to a complex D x T matrix with zero imaginary part.
ObservationMatrix load_series_csv(const std::string& path,
                                  const LoadOptions& options);

struct PhaseTable {
  Matrix phases;       // D x K, entries in [0, 1)
  Vector frequencies;  // K, cycles per configured time unit
};

/// Per-entry mode phases arg(w_dk)/(2 pi) wrapped to [0,1) and per-mode
/// frequencies: |arg lambda_k|/(2 pi) cycles per sample, scaled by
/// samples_per_unit to cycles per time unit (e.g. 365.25/7 for weekly
/// samples reported per year).
PhaseTable mode_phases(const ModeMatrix& modes,
                       const model::KoopmanSpectrum& eigenvalues,
                       double samples_per_unit);

} // namespace gpkmd::data

#endif
