// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef GPKMD_INIT_HPP
#define GPKMD_INIT_HPP

#include "gpkmd/model.hpp"
#include "gpkmd/types.hpp"

namespace gpkmd::init {

/// Eigenvalue/mode/amplitude triples from exact DMD, sorted by |amplitude|
/// descending, conjugate pairs kept together.
struct DmdResult {
  CVector eigenvalues; // length K
  ModeMatrix modes;    // D x K
  CVector amplitudes;  // length K
};

/// PCA initialization of the latent trajectory: centers the real stacking
/// [Re Y; Im Y], projects onto the top-p principal directions, and
/// prepends x_0 = x_1 (no observation constrains x_0).
LatentTrajectory pca_latents(const ObservationMatrix& y, Index p);

/// Exact (Tu et al. convention) SVD-based DMD of rank k on the snapshot
/// pair (columns 1..T-1, columns 2..T). Amplitudes solve the least-squares
/// fit of the first snapshot.
DmdResult dmd(const ObservationMatrix& y, Index k);

/// Principal-branch log(lambda)/dt.
CVector to_continuous(const model::KoopmanSpectrum& spec);

} // namespace gpkmd::init

#endif
