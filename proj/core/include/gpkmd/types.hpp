// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef GPKMD_TYPES_HPP
#define GPKMD_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstddef>

namespace gpkmd {

using Index = Eigen::Index;
using Complex = std::complex<double>;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Complex D x T data matrix; columns are time steps.
using ObservationMatrix = CMatrix;

/// Real P x (T+1) matrix of latent states x_0 ... x_T (columns).
using LatentTrajectory = Matrix;

/// Complex D x K mode matrix (columns are modes).
using ModeMatrix = CMatrix;

/// Tracks the footprint of large temporaries so scaling tests can assert
/// that the low-rank paths never approach the dense DT x DT requirement.
/// Counts are in scalar elements, not bytes.
class Workspace {
public:
  class Scope {
  public:
    explicit Scope(std::size_t elements);
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;
    ~Scope();

  private:
    std::size_t elements_;
  };

  static void reset();
  static std::size_t current_elements();
  static std::size_t peak_elements();
};

} // namespace gpkmd

#endif
