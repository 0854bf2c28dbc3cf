// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef GPKMD_KERNELS_HPP
#define GPKMD_KERNELS_HPP

#include <string>

#include "gpkmd/types.hpp"

namespace gpkmd::kernels {

enum class KernelVariant { Rbf, Linear, RbfPlusLinear };

struct KernelSpec {
  KernelVariant variant = KernelVariant::Rbf;
  double rbf_variance = 1.0;
  double rbf_lengthscale = 1.0;
  double linear_variance = 1.0;

  void validate() const;

  static KernelSpec rbf(double variance = 1.0, double lengthscale = 1.0);
  static KernelSpec linear(double variance = 1.0);
  static KernelSpec rbf_plus_linear(double rbf_variance = 1.0,
                                    double lengthscale = 1.0,
                                    double linear_variance = 1.0);
};

std::string to_string(KernelVariant v);
KernelVariant variant_from_string(const std::string& s);

/// k(a, b) for single points (columns).
double kernel_value(const Eigen::Ref<const Vector>& a,
                    const Eigen::Ref<const Vector>& b, const KernelSpec& spec);

/// Gram matrix with entry (i, j) = k(a_i, b_j); points are columns.
Matrix gram(const Eigen::Ref<const Matrix>& points_a,
            const Eigen::Ref<const Matrix>& points_b, const KernelSpec& spec);

/// i-th column of dG/dx_{pi} for the Gram matrix of a single point set;
/// the full derivative is this column placed in row and column i, with
/// the (i, i) entry equal to the column's own i-th element.
Vector gram_grad_input(const Eigen::Ref<const Matrix>& points,
                       const KernelSpec& spec, Index p, Index i);

/// Row i of the derivative of the cross-Gram matrix k(points, landmarks)
/// with respect to x_{pi}; the landmarks are treated as constants.
Vector gram_grad_cross(const Eigen::Ref<const Matrix>& points,
                       const Eigen::Ref<const Matrix>& landmarks,
                       const KernelSpec& spec, Index p, Index i);

/// Median of pairwise distances; the default RBF lengthscale heuristic.
/// Zero distances (duplicate points) are excluded; returns 1 if none left.
double median_pairwise_distance(const Eigen::Ref<const Matrix>& points);

} // namespace gpkmd::kernels

#endif
