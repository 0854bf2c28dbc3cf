// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#include "gpkmd/model.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace gpkmd::model {

namespace {

constexpr double kLogPi = 1.1447298858494001741; // log(pi)

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double log_invgamma(double v, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) -
         (shape + 1.0) * std::log(v) - rate / v;
}

// Nystrom factor of the Gram matrix of `points` from explicit landmark
// coordinates: R R^T = C Wl^+ C^T with C = k(points, landmarks). Also
// returns Q = C Wl^+, the piece needed to differentiate the approximation
// with respect to the points (the landmarks are constants).
struct NystromParts {
  kron::LowRankFactor fac;
  Matrix q; // T x S
};

NystromParts nystrom_points(const Eigen::Ref<const Matrix>& points,
                            const Eigen::Ref<const Matrix>& landmarks,
                            const kernels::KernelSpec& kernel) {
  const Matrix c = kernels::gram(points, landmarks, kernel);
  const Matrix wl = kernels::gram(landmarks, landmarks, kernel);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(wl);
  const Vector evals = eig.eigenvalues();
  const double cutoff = 1e-10 * std::max(0.0, evals.maxCoeff());
  Matrix basis(wl.rows(), wl.cols());
  Index r = 0;
  for (Index j = evals.size() - 1; j >= 0; --j) {
    if (evals[j] <= cutoff) continue;
    basis.col(r++) = eig.eigenvectors().col(j) / std::sqrt(evals[j]);
  }
  NystromParts parts;
  const Matrix rfac = c * basis.leftCols(r);
  parts.fac = kron::LowRankFactor::from_matrix(rfac.cast<Complex>(), 1e-14);
  parts.q = rfac * basis.leftCols(r).transpose();
  return parts;
}

// One complex-normal factor of the likelihood with covariance
// sigma^2 I + sigma_b^2 (G (x) H), G = Ag Ag^T and H = Bh Bh^*.
struct TermWork {
  Matrix ag;   // T x sg, real
  CMatrix bh;  // D x sh
  Vector sg2;  // singular values squared (G side)
  Vector sh2;  // singular values squared (H side)
  Matrix dmat; // sh x sg: sigma^2 + sigma_b^2 sg2[j] sh2[i]
  CMatrix ytil; // sh x sg, the down-projected data
  CMatrix e;    // D x T, Sigma^{-1} vec(Y) reshaped
  double loglik = 0.0;

  // Only when gradients are requested:
  Matrix mre;  // T x T, Re(E^* H E)
  Matrix nmat; // T x T, Ag diag(dvec) Ag^T
  CMatrix pm;  // D x D, quadratic minus trace projector for mode gradients

  // Low-rank path only: Q = C Wl^+ and the frozen landmark coordinates,
  // so the latent gradient can follow the Nystrom approximation instead
  // of the exact Gram matrix.
  bool low_rank = false;
  Matrix q;         // T x S
  Matrix landmarks; // P x S
};

TermWork build_term(const ObservationMatrix& y,
                    const Eigen::Ref<const Matrix>& points,
                    const CMatrix& h_root, const kernels::KernelSpec& kernel,
                    double noise, double coef, Index rank_s,
                    const Matrix* landmarks, bool with_grads) {
  const Index d = y.rows();
  const Index t = y.cols();

  TermWork w;
  kron::LowRankFactor gfac;
  if (rank_s >= t || landmarks == nullptr) {
    gfac = kron::LowRankFactor::from_psd(
        kernels::gram(points, points, kernel), 1e-12);
  } else {
    NystromParts parts = nystrom_points(points, *landmarks, kernel);
    gfac = std::move(parts.fac);
    if (with_grads) {
      w.low_rank = true;
      w.q = std::move(parts.q);
      w.landmarks = *landmarks;
    }
  }
  const kron::LowRankFactor hfac =
      kron::LowRankFactor::from_matrix(h_root, 0.0);

  const Index sg = gfac.rank();
  const Index sh = hfac.rank();
  w.ag = (gfac.u * gfac.sigma.asDiagonal()).real();
  w.bh = hfac.u * hfac.sigma.asDiagonal();
  w.sg2 = gfac.sigma.array().square();
  w.sh2 = hfac.sigma.array().square();

  Workspace::Scope scope(static_cast<std::size_t>(
      d * t + t * sg + d * sh + 3 * sg * sh));

  w.dmat.resize(sh, sg);
  for (Index j = 0; j < sg; ++j)
    for (Index i = 0; i < sh; ++i)
      w.dmat(i, j) = noise + coef * w.sg2[j] * w.sh2[i];

  const CMatrix agc = w.ag.cast<Complex>();
  const CMatrix z = w.bh.adjoint() * y * agc; // sh x sg
  w.ytil = z.array() / w.dmat.cast<Complex>().array();

  double logdet = static_cast<double>(d * t - sg * sh) * std::log(noise);
  logdet += w.dmat.array().log().sum();
  const double quad =
      (y.squaredNorm() -
       coef * (z.array().abs2() / w.dmat.array()).sum()) /
      noise;
  w.loglik = -static_cast<double>(d * t) * kLogPi - logdet - quad;

  w.e = (y - coef * (w.bh * w.ytil * agc.transpose())) / noise;

  if (with_grads) {
    Workspace::Scope grad_scope(
        static_cast<std::size_t>(2 * t * t + d * d + 2 * sh * t));
    const CMatrix f = w.bh.adjoint() * w.e; // sh x t
    const Matrix fre = f.real();
    const Matrix fim = f.imag();
    w.mre = fre.transpose() * fre + fim.transpose() * fim;

    Vector dvec(sg);
    for (Index j = 0; j < sg; ++j) {
      double acc = 0.0;
      for (Index i = 0; i < sh; ++i)
        acc += w.sh2[i] * w.sh2[i] / w.dmat(i, j);
      dvec[j] = coef * acc;
    }
    w.nmat = w.ag * dvec.asDiagonal() * w.ag.transpose();

    // Mode-side projector: P - Ptilde with P = E G E^* and
    // Ptilde the trace-term counterpart.
    const CMatrix ea = w.e * agc; // d x sg
    Vector hvec(sh);
    for (Index i = 0; i < sh; ++i) {
      double acc = 0.0;
      for (Index j = 0; j < sg; ++j)
        acc += w.sg2[j] * w.sg2[j] / w.dmat(i, j);
      hvec[i] = coef / noise * acc;
    }
    const double tr_g = w.sg2.sum();
    w.pm = ea * ea.adjoint();
    w.pm.noalias() += w.bh * hvec.asDiagonal() * w.bh.adjoint();
    w.pm.diagonal().array() -= tr_g / noise;
  }
  return w;
}

// Accumulates the likelihood gradient contribution of one term into the
// latent-gradient block starting at column `offset`.
void add_latent_grad(const TermWork& w,
                     const Eigen::Ref<const Matrix>& points,
                     const kernels::KernelSpec& kernel, double noise,
                     double coef, Index offset, Matrix& dx) {
  const Index t = points.cols();
  const Index p_dim = points.rows();
  const double tr_h = w.sh2.sum();

  if (w.low_rank) {
    // Sensitivity to the approximated Gram matrix is the symmetric
    // M = coef * (Mre - (tr(H) I - N) / sigma^2); with G = C Wl^+ C^T
    // only row i of C depends on x_i, so
    // dL/dx_pi = 2 (M Q)_i . dC_i with Q = C Wl^+.
    Matrix mq = w.mre * w.q;
    mq.noalias() -= (tr_h / noise) * w.q;
    mq.noalias() += (w.nmat * w.q) / noise;
    mq *= coef;
    for (Index i = 0; i < t; ++i)
      for (Index p = 0; p < p_dim; ++p)
        dx(p, i + offset) +=
            2.0 * mq.row(i).dot(
                      kernels::gram_grad_cross(points, w.landmarks, kernel,
                                               p, i));
    return;
  }

  for (Index i = 0; i < t; ++i) {
    for (Index p = 0; p < p_dim; ++p) {
      const Vector c = kernels::gram_grad_input(points, kernel, p, i);
      const double nc = w.nmat.row(i).dot(c);
      const double mc = w.mre.row(i).dot(c);
      const double trace_term =
          (c[i] * tr_h - 2.0 * nc + c[i] * w.nmat(i, i)) / noise;
      const double quad_term = 2.0 * mc - c[i] * w.mre(i, i);
      dx(p, i + offset) += coef * (quad_term - trace_term);
    }
  }
}

double prior_logdensity(const GpkmdParams& params, const PriorSpec& prior,
                        Matrix* dx) {
  const Index t = params.latents.cols() - 1;
  const Index p_dim = params.latents.rows();
  const double sx2 = prior.latent_scale;

  const auto x0 = params.latents.col(0);
  const auto x1 = params.latents.rightCols(t); // P x T
  const auto pts0 = params.latents.leftCols(t);

  Workspace::Scope scope(static_cast<std::size_t>(3 * t * t));
  Matrix c = kernels::gram(pts0, pts0, prior.latent_kernel);
  c.diagonal().array() += sx2;
  Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_prior: singular latent prior covariance");
  double logdet_c = 0.0;
  for (Index i = 0; i < t; ++i)
    logdet_c += 2.0 * std::log(llt.matrixLLT()(i, i));

  const Matrix wm = llt.solve(x1.transpose()).transpose(); // X1 C^{-1}, P x T
  const double quad = (wm.array() * x1.array()).sum();

  double lp = 0.0;
  lp += -0.5 * p_dim * std::log(2.0 * std::numbers::pi * sx2) -
        x0.squaredNorm() / (2.0 * sx2);
  lp += -0.5 * static_cast<double>(p_dim * t) *
            std::log(2.0 * std::numbers::pi) -
        0.5 * p_dim * logdet_c - 0.5 * quad;
  lp += -static_cast<double>(params.modes.size()) *
            (kLogPi + std::log(prior.mode_scale)) -
        params.modes.squaredNorm() / prior.mode_scale;
  lp += -static_cast<double>(params.eigenvalues.discrete.size()) *
            (kLogPi + std::log(prior.eig_scale)) -
        params.eigenvalues.discrete.squaredNorm() / prior.eig_scale;
  lp += log_invgamma(params.noise_var, prior.noise_shape, prior.noise_rate);
  lp += log_invgamma(params.coef_var, prior.coef_shape, prior.coef_rate);

  if (dx != nullptr) {
    dx->col(0) -= x0 / sx2;
    dx->rightCols(t) -= wm;
    const Matrix cinv = llt.solve(Matrix::Identity(t, t));
    const Matrix s =
        static_cast<double>(p_dim) * cinv - wm.transpose() * wm;
    for (Index i = 0; i < t; ++i) {
      for (Index p = 0; p < p_dim; ++p) {
        const Vector cc =
            kernels::gram_grad_input(pts0, prior.latent_kernel, p, i);
        (*dx)(p, i) += -0.5 * (2.0 * s.row(i).dot(cc) - cc[i] * s(i, i));
      }
    }
  }
  return lp;
}

double cn_logpdf_dense(const CVector& v, const CMatrix& sigma) {
  Eigen::LLT<CMatrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_likelihood_naive: covariance not PD");
  double logdet = 0.0;
  for (Index i = 0; i < sigma.rows(); ++i)
    logdet += 2.0 * std::log(std::real(llt.matrixLLT()(i, i)));
  const double quad = std::real(v.dot(llt.solve(v)));
  return -static_cast<double>(v.size()) * kLogPi - logdet - quad;
}

struct FastState {
  TermWork t1, t2;
};

FastState build_fast(const ObservationMatrix& y, const GpkmdParams& params,
                     const kernels::KernelSpec& kernel, Index rank_s,
                     const Matrix* landmark_points, bool with_grads) {
  params.validate();
  const Index t = y.cols();
  require(t >= 2, "gpkmd: need T >= 2");
  require(params.latents.cols() == t + 1,
          "gpkmd: latents must have T+1 columns");
  require(params.modes.rows() == y.rows(), "gpkmd: mode rows must equal D");
  require(rank_s >= 1 && rank_s <= t, "gpkmd: need 1 <= rank_s <= T");

  Matrix landmarks;
  const Matrix* lp = nullptr;
  if (rank_s < t) {
    if (landmark_points != nullptr) {
      landmarks = *landmark_points;
    } else {
      const auto idx = kron::stride_landmarks(t + 1, rank_s);
      landmarks.resize(params.latents.rows(), rank_s);
      for (Index j = 0; j < rank_s; ++j)
        landmarks.col(j) = params.latents.col(idx[static_cast<std::size_t>(j)]);
    }
    lp = &landmarks;
  }

  FastState st;
  const CMatrix wl =
      params.modes * params.eigenvalues.discrete.asDiagonal();
  st.t1 = build_term(y, params.latents.rightCols(t), params.modes, kernel,
                     params.noise_var, params.coef_var, rank_s, lp,
                     with_grads);
  st.t2 = build_term(y, params.latents.leftCols(t), wl, kernel,
                     params.noise_var, params.coef_var, rank_s, lp,
                     with_grads);
  return st;
}

} // namespace

void GpkmdParams::validate() const {
  require(noise_var > 0.0, "GpkmdParams: noise_var must be > 0");
  require(coef_var > 0.0, "GpkmdParams: coef_var must be > 0");
  require(latents.allFinite() && modes.allFinite() &&
              eigenvalues.discrete.allFinite(),
          "GpkmdParams: non-finite entries");
  if (modes.cols() > modes.rows())
    std::cerr << "gpkmd: warning: K > D is not recommended\n";
}

void PriorSpec::validate() const {
  require(latent_scale > 0.0 && mode_scale > 0.0 && eig_scale > 0.0 &&
              noise_shape > 0.0 && noise_rate > 0.0 && coef_shape > 0.0 &&
              coef_rate > 0.0,
          "PriorSpec: all scales and shapes must be > 0");
  latent_kernel.validate();
}

double log_likelihood_naive(const ObservationMatrix& y,
                            const GpkmdParams& params,
                            const kernels::KernelSpec& kernel) {
  params.validate();
  const Index t = y.cols();
  require(t >= 2, "gpkmd: need T >= 2");
  require(params.latents.cols() == t + 1,
          "gpkmd: latents must have T+1 columns");

  const Matrix k1 = kernels::gram(params.latents.rightCols(t),
                                  params.latents.rightCols(t), kernel);
  const Matrix k0 = kernels::gram(params.latents.leftCols(t),
                                  params.latents.leftCols(t), kernel);
  const CMatrix wl =
      params.modes * params.eigenvalues.discrete.asDiagonal();
  const CMatrix h1 = params.modes * params.modes.adjoint();
  const CMatrix h2 = wl * wl.adjoint();

  const Index n = y.rows() * t;
  const CVector v = kron::vec(y);
  CMatrix sigma1 = params.coef_var * kron::kron_dense(k1.cast<Complex>(), h1);
  sigma1.diagonal().array() += params.noise_var;
  CMatrix sigma2 = params.coef_var * kron::kron_dense(k0.cast<Complex>(), h2);
  sigma2.diagonal().array() += params.noise_var;
  (void)n;
  return cn_logpdf_dense(v, sigma1) + cn_logpdf_dense(v, sigma2);
}

double log_likelihood_fast(const ObservationMatrix& y,
                           const GpkmdParams& params,
                           const kernels::KernelSpec& kernel, Index rank_s,
                           const Matrix* landmark_points) {
  const FastState st =
      build_fast(y, params, kernel, rank_s, landmark_points, false);
  return st.t1.loglik + st.t2.loglik;
}

double log_prior(const GpkmdParams& params, const PriorSpec& prior) {
  params.validate();
  prior.validate();
  return prior_logdensity(params, prior, nullptr);
}

double log_posterior(const ObservationMatrix& y, const GpkmdParams& params,
                     const kernels::KernelSpec& kernel, const PriorSpec& prior,
                     Index rank_s, const Matrix* landmark_points) {
  return log_likelihood_fast(y, params, kernel, rank_s, landmark_points) +
         log_prior(params, prior);
}

Evaluation evaluate(const ObservationMatrix& y, const GpkmdParams& params,
                    const kernels::KernelSpec& kernel, const PriorSpec& prior,
                    Index rank_s, const Matrix* landmark_points) {
  prior.validate();
  const FastState st =
      build_fast(y, params, kernel, rank_s, landmark_points, true);
  const Index t = y.cols();
  const Index d = y.rows();
  const Index p_dim = params.latent_dim();
  const double noise = params.noise_var;
  const double coef = params.coef_var;

  Evaluation ev;
  ev.d_latents = Matrix::Zero(p_dim, t + 1);
  const double lp = prior_logdensity(params, prior, &ev.d_latents);
  ev.log_posterior = st.t1.loglik + st.t2.loglik + lp;

  // Latents: term 1 covers x_1 ... x_T, term 2 covers x_0 ... x_{T-1}.
  add_latent_grad(st.t1, params.latents.rightCols(t), kernel, noise, coef, 1,
                  ev.d_latents);
  add_latent_grad(st.t2, params.latents.leftCols(t), kernel, noise, coef, 0,
                  ev.d_latents);

  // Modes: term 1 through H = W W^*, term 2 through H = (W Lambda)(.)^*.
  const Vector lam2 = params.eigenvalues.discrete.array().abs2();
  ev.d_modes = 2.0 * coef *
               (st.t1.pm * params.modes +
                st.t2.pm * params.modes * lam2.asDiagonal());
  ev.d_modes -= 2.0 / prior.mode_scale * params.modes;

  // Eigenvalues enter only through |lambda_k|^2 in term 2; the likelihood
  // gradient is collinear with lambda_k.
  const Index k = params.num_modes();
  ev.d_eigenvalues.resize(k);
  for (Index j = 0; j < k; ++j) {
    const auto wk = params.modes.col(j);
    const double curv = std::real(Complex(wk.adjoint() * st.t2.pm * wk));
    ev.d_eigenvalues[j] =
        2.0 * coef * params.eigenvalues.discrete[j] * curv -
        2.0 / prior.eig_scale * params.eigenvalues.discrete[j];
  }

  // Variances (log-space).
  double d_noise = 0.0, d_coef = 0.0;
  for (const TermWork* w : {&st.t1, &st.t2}) {
    double s_inv = 0.0, s_gh = 0.0;
    for (Index j = 0; j < w->sg2.size(); ++j)
      for (Index i = 0; i < w->sh2.size(); ++i) {
        s_inv += w->sg2[j] * w->sh2[i] / w->dmat(i, j);
        s_gh += w->sg2[j] * w->sg2[j] * w->sh2[i] * w->sh2[i] / w->dmat(i, j);
      }
    const double tr_inv =
        (static_cast<double>(d * t) - coef * s_inv) / noise;
    const double tr_gh = (w->sg2.sum() * w->sh2.sum() - coef * s_gh) / noise;
    const CMatrix ze = w->bh.adjoint() * w->e * w->ag.cast<Complex>();
    d_noise += -tr_inv + w->e.squaredNorm();
    d_coef += -tr_gh + ze.squaredNorm();
  }
  ev.d_log_noise = noise * d_noise - (prior.noise_shape + 1.0) +
                   prior.noise_rate / noise;
  ev.d_log_coef = coef * d_coef - (prior.coef_shape + 1.0) +
                  prior.coef_rate / coef;
  return ev;
}

Matrix grad_latents(const ObservationMatrix& y, const GpkmdParams& params,
                    const kernels::KernelSpec& kernel, const PriorSpec& prior,
                    Index rank_s) {
  return evaluate(y, params, kernel, prior, rank_s).d_latents;
}

CMatrix grad_modes(const ObservationMatrix& y, const GpkmdParams& params,
                   const kernels::KernelSpec& kernel, const PriorSpec& prior,
                   Index rank_s) {
  return evaluate(y, params, kernel, prior, rank_s).d_modes;
}

std::pair<double, double> grad_variances(const ObservationMatrix& y,
                                         const GpkmdParams& params,
                                         const kernels::KernelSpec& kernel,
                                         const PriorSpec& prior,
                                         Index rank_s) {
  const Evaluation ev = evaluate(y, params, kernel, prior, rank_s);
  return {ev.d_log_noise, ev.d_log_coef};
}

CVector grad_eigenvalues(const ObservationMatrix& y, const GpkmdParams& params,
                         const kernels::KernelSpec& kernel,
                         const PriorSpec& prior, Index rank_s) {
  return evaluate(y, params, kernel, prior, rank_s).d_eigenvalues;
}

} // namespace gpkmd::model
