// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#include "gpkmd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gpkmd::kernels {

void KernelSpec::validate() const {
  const bool has_rbf = variant != KernelVariant::Linear;
  const bool has_lin = variant != KernelVariant::Rbf;
  if (has_rbf && (rbf_variance <= 0.0 || rbf_lengthscale <= 0.0))
    throw std::invalid_argument(
        "KernelSpec: rbf variance and lengthscale must be > 0");
  if (has_lin && linear_variance < 0.0)
    throw std::invalid_argument("KernelSpec: linear variance must be >= 0");
}

KernelSpec KernelSpec::rbf(double variance, double lengthscale) {
  KernelSpec s;
  s.variant = KernelVariant::Rbf;
  s.rbf_variance = variance;
  s.rbf_lengthscale = lengthscale;
  return s;
}

KernelSpec KernelSpec::linear(double variance) {
  KernelSpec s;
  s.variant = KernelVariant::Linear;
  s.linear_variance = variance;
  return s;
}

KernelSpec KernelSpec::rbf_plus_linear(double rbf_variance, double lengthscale,
                                       double linear_variance) {
  KernelSpec s;
  s.variant = KernelVariant::RbfPlusLinear;
  s.rbf_variance = rbf_variance;
  s.rbf_lengthscale = lengthscale;
  s.linear_variance = linear_variance;
  return s;
}

std::string to_string(KernelVariant v) {
  switch (v) {
    case KernelVariant::Rbf: return "rbf";
    case KernelVariant::Linear: return "linear";
    case KernelVariant::RbfPlusLinear: return "rbf_plus_linear";
  }
  return "rbf";
}

KernelVariant variant_from_string(const std::string& s) {
  if (s == "rbf") return KernelVariant::Rbf;
  if (s == "linear") return KernelVariant::Linear;
  if (s == "rbf_plus_linear") return KernelVariant::RbfPlusLinear;
  throw std::invalid_argument("unknown kernel variant: " + s);
}

double kernel_value(const Eigen::Ref<const Vector>& a,
                    const Eigen::Ref<const Vector>& b,
                    const KernelSpec& spec) {
  spec.validate();
  double v = 0.0;
  if (spec.variant != KernelVariant::Linear) {
    const double d2 = (a - b).squaredNorm();
    v += spec.rbf_variance *
         std::exp(-d2 / (2.0 * spec.rbf_lengthscale * spec.rbf_lengthscale));
  }
  if (spec.variant != KernelVariant::Rbf)
    v += spec.linear_variance * a.dot(b);
  return v;
}

Matrix gram(const Eigen::Ref<const Matrix>& points_a,
            const Eigen::Ref<const Matrix>& points_b,
            const KernelSpec& spec) {
  spec.validate();
  if (points_a.rows() != points_b.rows())
    throw std::invalid_argument("gram: dimension mismatch");
  const Index n = points_a.cols();
  const Index m = points_b.cols();
  Matrix out = Matrix::Zero(n, m);
  if (spec.variant != KernelVariant::Linear) {
    const double inv2l2 =
        1.0 / (2.0 * spec.rbf_lengthscale * spec.rbf_lengthscale);
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < n; ++i)
        out(i, j) = spec.rbf_variance *
                    std::exp(-(points_a.col(i) - points_b.col(j))
                                  .squaredNorm() * inv2l2);
  }
  if (spec.variant != KernelVariant::Rbf)
    out.noalias() += spec.linear_variance * points_a.transpose() * points_b;
  return out;
}

Vector gram_grad_input(const Eigen::Ref<const Matrix>& points,
                       const KernelSpec& spec, Index p, Index i) {
  spec.validate();
  const Index n = points.cols();
  if (p < 0 || p >= points.rows() || i < 0 || i >= n)
    throw std::out_of_range("gram_grad_input: index out of range");
  Vector c = Vector::Zero(n);
  if (spec.variant != KernelVariant::Linear) {
    const double l2 = spec.rbf_lengthscale * spec.rbf_lengthscale;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue; // stationary part: dk(x_i, x_i)/dx = 0
      const double k = spec.rbf_variance *
                       std::exp(-(points.col(i) - points.col(j))
                                     .squaredNorm() / (2.0 * l2));
      c[j] += -(points(p, i) - points(p, j)) / l2 * k;
    }
  }
  if (spec.variant != KernelVariant::Rbf) {
    for (Index j = 0; j < n; ++j)
      c[j] += spec.linear_variance * points(p, j);
    c[i] += spec.linear_variance * points(p, i); // diagonal picks up 2 v x_pi
  }
  return c;
}

Vector gram_grad_cross(const Eigen::Ref<const Matrix>& points,
                       const Eigen::Ref<const Matrix>& landmarks,
                       const KernelSpec& spec, Index p, Index i) {
  spec.validate();
  const Index s = landmarks.cols();
  if (p < 0 || p >= points.rows() || i < 0 || i >= points.cols() ||
      landmarks.rows() != points.rows())
    throw std::out_of_range("gram_grad_cross: index out of range");
  Vector c = Vector::Zero(s);
  if (spec.variant != KernelVariant::Linear) {
    const double l2 = spec.rbf_lengthscale * spec.rbf_lengthscale;
    for (Index j = 0; j < s; ++j) {
      const double k = spec.rbf_variance *
                       std::exp(-(points.col(i) - landmarks.col(j))
                                     .squaredNorm() / (2.0 * l2));
      c[j] += -(points(p, i) - landmarks(p, j)) / l2 * k;
    }
  }
  if (spec.variant != KernelVariant::Rbf)
    c += spec.linear_variance * landmarks.row(p).transpose();
  return c;
}

double median_pairwise_distance(const Eigen::Ref<const Matrix>& points) {
  const Index n = points.cols();
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double d = (points.col(i) - points.col(j)).norm();
      if (d > 0.0) dists.push_back(d);
    }
  if (dists.empty()) return 1.0;
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<long>(mid),
                   dists.end());
  return dists[mid];
}

} // namespace gpkmd::kernels
