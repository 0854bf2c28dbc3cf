// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#include "gpkmd/optimize.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>

namespace gpkmd::opt {

namespace {

using model::Evaluation;
using model::GpkmdParams;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Flat view of the optimized variables: latents, Re W, Im W, |lambda|,
// log sigma^2, log sigma_b^2. Eigenvalue angles are structural constants.
class Packed {
public:
  Packed(const GpkmdParams& init, Index t)
      : p_(init.latents.rows()), t_(t), d_(init.modes.rows()),
        k_(init.modes.cols()),
        phases_(init.eigenvalues.discrete.size()), dt_(init.eigenvalues.dt) {
    for (Index i = 0; i < k_; ++i)
      phases_[i] = std::arg(init.eigenvalues.discrete[i]);
  }

  Index size() const { return p_ * (t_ + 1) + 2 * d_ * k_ + k_ + 2; }

  Vector pack(const GpkmdParams& params) const {
    Vector x(size());
    Index off = 0;
    x.segment(off, p_ * (t_ + 1)) =
        Eigen::Map<const Vector>(params.latents.data(), p_ * (t_ + 1));
    off += p_ * (t_ + 1);
    x.segment(off, d_ * k_) =
        Eigen::Map<const Vector>(params.modes.real().eval().data(), d_ * k_);
    off += d_ * k_;
    x.segment(off, d_ * k_) =
        Eigen::Map<const Vector>(params.modes.imag().eval().data(), d_ * k_);
    off += d_ * k_;
    for (Index i = 0; i < k_; ++i)
      x[off + i] = std::abs(params.eigenvalues.discrete[i]);
    off += k_;
    x[off++] = std::log(params.noise_var);
    x[off] = std::log(params.coef_var);
    return x;
  }

  GpkmdParams unpack(const Vector& x) const {
    GpkmdParams params;
    Index off = 0;
    params.latents =
        Eigen::Map<const Matrix>(x.data() + off, p_, t_ + 1);
    off += p_ * (t_ + 1);
    const Matrix wr = Eigen::Map<const Matrix>(x.data() + off, d_, k_);
    off += d_ * k_;
    const Matrix wi = Eigen::Map<const Matrix>(x.data() + off, d_, k_);
    off += d_ * k_;
    params.modes = wr.cast<Complex>() + Complex(0, 1) * wi.cast<Complex>();
    params.eigenvalues.discrete.resize(k_);
    params.eigenvalues.dt = dt_;
    for (Index i = 0; i < k_; ++i)
      params.eigenvalues.discrete[i] =
          x[off + i] * std::exp(Complex(0, 1) * phases_[i]);
    off += k_;
    params.noise_var = std::exp(x[off++]);
    params.coef_var = std::exp(x[off]);
    return params;
  }

  Vector pack_grad(const Evaluation& ev) const {
    Vector g(size());
    Index off = 0;
    g.segment(off, p_ * (t_ + 1)) =
        Eigen::Map<const Vector>(ev.d_latents.data(), p_ * (t_ + 1));
    off += p_ * (t_ + 1);
    const Matrix gr = ev.d_modes.real();
    const Matrix gi = ev.d_modes.imag();
    g.segment(off, d_ * k_) = Eigen::Map<const Vector>(gr.data(), d_ * k_);
    off += d_ * k_;
    g.segment(off, d_ * k_) = Eigen::Map<const Vector>(gi.data(), d_ * k_);
    off += d_ * k_;
    // Directional derivative along the frozen-angle ray.
    for (Index i = 0; i < k_; ++i)
      g[off + i] = std::real(std::conj(ev.d_eigenvalues[i]) *
                             std::exp(Complex(0, 1) * phases_[i]));
    off += k_;
    g[off++] = ev.d_log_noise;
    g[off] = ev.d_log_coef;
    return g;
  }

  Index magnitude_offset() const { return p_ * (t_ + 1) + 2 * d_ * k_; }
  Index num_modes() const { return k_; }

private:
  Index p_, t_, d_, k_;
  Vector phases_;
  double dt_;
};

struct Objective {
  const ObservationMatrix& y;
  const kernels::KernelSpec& kernel;
  const model::PriorSpec& prior;
  const Packed& packer;
  Index rank_s;
  const Matrix* landmarks; // null for the exact path

  double value(const Vector& x) const {
    const GpkmdParams p = packer.unpack(x);
    return model::log_posterior(y, p, kernel, prior, rank_s, landmarks);
  }

  double value_grad(const Vector& x, Vector& g) const {
    const GpkmdParams p = packer.unpack(x);
    const Evaluation ev =
        model::evaluate(y, p, kernel, prior, rank_s, landmarks);
    g = packer.pack_grad(ev);
    return ev.log_posterior;
  }
};

} // namespace

void FitConfig::validate() const {
  require(max_iters >= 0 && grad_tol > 0.0 && armijo_c > 0.0 &&
              armijo_shrink > 0.0 && armijo_shrink < 1.0 &&
              max_line_steps >= 1 && landmark_refresh >= 1 && rank_s >= 0,
          "FitConfig: invalid field");
}

std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::Converged: return "converged";
    case FitStatus::MaxIters: return "max_iters";
    case FitStatus::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

FitResult map_fit(const ObservationMatrix& y, const GpkmdParams& init_params,
                  const kernels::KernelSpec& kernel,
                  const model::PriorSpec& prior, const FitConfig& config) {
  config.validate();
  const Index t = y.cols();
  const Index rank_s =
      (config.rank_s <= 0 || config.rank_s >= t) ? t : config.rank_s;

  Packed packer(init_params, t);
  const Index n = packer.size();
  const int restart_period =
      config.restart_period > 0 ? config.restart_period : static_cast<int>(n);

  // Landmark snapshot for the low-rank path; refreshed periodically.
  Matrix landmarks;
  const bool low_rank = rank_s < t;
  auto refresh_landmarks = [&](const GpkmdParams& p) {
    const auto idx = kron::stride_landmarks(t + 1, rank_s);
    landmarks.resize(p.latents.rows(), rank_s);
    for (Index j = 0; j < rank_s; ++j)
      landmarks.col(j) = p.latents.col(idx[static_cast<std::size_t>(j)]);
  };
  if (low_rank) refresh_landmarks(init_params);

  Objective obj{y, kernel, prior, packer, rank_s,
                low_rank ? &landmarks : nullptr};

  // Block-diagonal preconditioner at roughly the inverse Fisher scale of
  // each block: one latent coordinate touches O(D) data terms, one mode
  // entry or eigenvalue magnitude O(T), and the variance parameters all
  // D*T of them. Without this the variance/mode curvature forces steps
  // small enough to freeze the latents.
  Vector prec(n);
  {
    const Index p_dim = init_params.latents.rows();
    const Index d_dim = init_params.modes.rows();
    const Index k_dim = init_params.modes.cols();
    Index off = 0;
    prec.segment(off, p_dim * (t + 1))
        .setConstant(1.0 / static_cast<double>(d_dim));
    off += p_dim * (t + 1);
    prec.segment(off, 2 * d_dim * k_dim)
        .setConstant(1.0 / static_cast<double>(t));
    off += 2 * d_dim * k_dim;
    // Eigenvalue magnitudes are variance components; like the noise
    // scales they are weakly identified when the kernel underfits, so
    // they get the most conservative damping.
    prec.segment(off, k_dim + 2)
        .setConstant(1.0 / static_cast<double>(d_dim * t));
  }

  Vector x = packer.pack(init_params);
  Vector g(n);
  double fx = obj.value_grad(x, g);
  if (!std::isfinite(fx))
    throw std::runtime_error("map_fit: non-finite objective at init");

  FitResult res;
  res.status = FitStatus::MaxIters;
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  Vector d = prec.cwiseProduct(g);
  double alpha_prev = 0.0;
  const Index m_off = packer.magnitude_offset();
  const Index k = packer.num_modes();

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < config.grad_tol) {
      res.status = FitStatus::Converged;
      break;
    }

    double slope = g.dot(d);
    if (slope <= 0.0) { // not an ascent direction: restart on the gradient
      d = prec.cwiseProduct(g);
      slope = g.dot(d);
    }

    const double dinf = d.lpNorm<Eigen::Infinity>();
    double alpha =
        alpha_prev > 0.0 ? 2.0 * alpha_prev : 1.0 / std::max(1.0, dinf);
    bool accepted = false;
    Vector x_new;
    double f_new = 0.0;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double a = alpha;
      for (int ls = 0; ls < config.max_line_steps; ++ls) {
        x_new = x + a * d;
        double f_try;
        try {
          f_try = obj.value(x_new);
        } catch (const std::exception&) {
          f_try = -std::numeric_limits<double>::infinity();
        }
        if (std::isfinite(f_try) &&
            f_try >= fx + config.armijo_c * a * slope) {
          accepted = true;
          f_new = f_try;
          alpha_prev = a;
          break;
        }
        a *= config.armijo_shrink;
      }
      if (!accepted && attempt == 0) { // restart on the steepest direction
        d = prec.cwiseProduct(g);
        slope = g.dot(d);
        alpha = 1.0 / std::max(1.0, d.lpNorm<Eigen::Infinity>());
      }
    }
    if (!accepted) {
      res.status = FitStatus::LineSearchFailed;
      break;
    }

    // Reflect eigenvalue magnitudes to keep the frozen angles intact; the
    // objective is even in each magnitude, so the value is unchanged.
    std::vector<Index> flipped;
    for (Index i = 0; i < k; ++i)
      if (x_new[m_off + i] < 0.0) {
        x_new[m_off + i] = -x_new[m_off + i];
        flipped.push_back(i);
      }

    x = x_new;
    Vector g_new(n);
    fx = obj.value_grad(x, g_new);
    for (Index i : flipped) g_new[m_off + i] = -g_new[m_off + i];
    (void)f_new;

    // Preconditioned Polak-Ribiere+ with periodic restart.
    const Vector pg_new = prec.cwiseProduct(g_new);
    double beta = pg_new.dot(g_new - g) / prec.cwiseProduct(g).dot(g);
    beta = std::max(0.0, beta);
    if (iter % restart_period == 0) beta = 0.0;
    d = pg_new + beta * d;
    g = g_new;

    res.trace.rows.push_back({iter, fx, g.lpNorm<Eigen::Infinity>(),
                              alpha_prev, elapsed()});
    if (config.verbose >= 2)
      std::cerr << "iter " << iter << " logpost " << fx << " grad "
                << g.lpNorm<Eigen::Infinity>() << " step " << alpha_prev
                << "\n";

    if (low_rank && iter % config.landmark_refresh == 0) {
      refresh_landmarks(packer.unpack(x));
      fx = obj.value_grad(x, g);
      d = prec.cwiseProduct(g); // stale history under the new approximation
    }
  }

  if (res.status != FitStatus::LineSearchFailed &&
      g.lpNorm<Eigen::Infinity>() < config.grad_tol)
    res.status = FitStatus::Converged;

  res.params = packer.unpack(x);
  res.log_posterior = fx;
  return res;
}

FitResult map_fit_restarts(const ObservationMatrix& y,
                           const GpkmdParams& init_params,
                           const kernels::KernelSpec& kernel,
                           const model::PriorSpec& prior,
                           const FitConfig& config, int restarts) {
  require(restarts >= 1, "map_fit_restarts: need restarts >= 1");
  if (restarts == 1) return map_fit(y, init_params, kernel, prior, config);

  std::vector<std::future<FitResult>> futures;
  futures.reserve(static_cast<std::size_t>(restarts));
  for (int r = 0; r < restarts; ++r) {
    futures.push_back(std::async(std::launch::async, [&, r] {
      GpkmdParams start = init_params;
      if (r > 0) { // first restart is the unperturbed initializer
        std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(r));
        std::normal_distribution<double> jitter(0.0, 0.01);
        for (Index j = 0; j < start.latents.cols(); ++j)
          for (Index i = 0; i < start.latents.rows(); ++i)
            start.latents(i, j) += jitter(rng);
      }
      FitConfig c = config;
      c.seed = config.seed + static_cast<std::uint64_t>(r);
      return map_fit(y, start, kernel, prior, c);
    }));
  }
  FitResult best;
  bool have = false;
  for (auto& f : futures) {
    FitResult r = f.get();
    if (!have || r.log_posterior > best.log_posterior) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

} // namespace gpkmd::opt
