// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#include "gpkmd/data.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace gpkmd::data {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::vector<std::vector<std::string>> read_csv_cells(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_cell(const std::string& cell, Index row, Index col) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos])))
    ++pos;
  if (cell.empty() || pos != cell.size())
    throw std::runtime_error("non-numeric cell at row " + std::to_string(row) +
                             ", column " + std::to_string(col) + ": '" + cell +
                             "'");
  return v;
}

} // namespace

void StuartLandauConfig::validate() const {
  require(dt > 0.0, "StuartLandauConfig: dt must be positive");
  require(t_len >= 2, "StuartLandauConfig: t_len must be at least 2");
  require(d >= 1, "StuartLandauConfig: d must be at least 1");
  require(noise_std >= 0.0, "StuartLandauConfig: noise_std must be >= 0");
}

Index sl_channel_fold(Index d, Index total) {
  require(d >= 1 && d <= total, "sl_channel_fold: channel out of range");
  if (d % 2 == 1) return d - (total + 1) / 2;
  return d / 2;
}

StuartLandauData stuart_landau(const StuartLandauConfig& config) {
  config.validate();
  const Index t = config.t_len;
  StuartLandauData out;
  out.truth.resize(2, t);

  double r = config.r0;
  double theta = config.theta0;
  for (Index i = 0; i < t; ++i) {
    out.truth(0, i) = r;
    out.truth(1, i) = theta;
    const double rn = r + (config.delta * r - r * r * r) * config.dt;
    theta += (config.gamma - config.beta * r * r) * config.dt;
    r = rn;
  }

  out.y.resize(config.d, t);
  std::mt19937_64 rng(config.seed);
  // Circular complex Gaussian: independent re/im parts of variance s^2/2.
  std::normal_distribution<double> part(
      0.0, config.noise_std / std::numbers::sqrt2);
  for (Index i = 0; i < t; ++i) {
    const double th = out.truth(1, i);
    for (Index d = 1; d <= config.d; ++d) {
      const double dp = static_cast<double>(sl_channel_fold(d, config.d));
      Complex v = std::exp(Complex(0.0, dp * th));
      if (config.noise_std > 0.0) v += Complex(part(rng), part(rng));
      out.y(d - 1, i) = v;
    }
  }
  return out;
}

CVector exact_sl_eigenvalues(double delta, double beta, double gamma,
                             Index l_max, Index n_max) {
  require(l_max >= 0 && n_max >= 0, "exact_sl_eigenvalues: negative grid size");
  const double omega0 = gamma - beta * delta;
  CVector grid((l_max + 1) * (2 * n_max + 1));
  Index pos = 0;
  for (Index l = 0; l <= l_max; ++l)
    for (Index n = -n_max; n <= n_max; ++n)
      grid[pos++] = Complex(-2.0 * static_cast<double>(l) * delta,
                            static_cast<double>(n) * omega0);
  return grid;
}

double eigenvalue_error(const CVector& estimated, const CVector& exact_grid) {
  require(estimated.size() > 0, "eigenvalue_error: no estimates");
  require(exact_grid.size() > 0, "eigenvalue_error: empty exact grid");
  double sq = 0.0;
  for (Index k = 0; k < estimated.size(); ++k) {
    const Complex est = estimated[k];
    Index best = 0;
    double best_im = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < exact_grid.size(); ++j) {
      const double dim = std::abs(est.imag() - exact_grid[j].imag());
      // Ties (equal imaginary part, different damping) resolve toward the
      // least-damped candidate.
      if (dim < best_im - 1e-12 ||
          (dim < best_im + 1e-12 &&
           exact_grid[j].real() > exact_grid[best].real())) {
        best_im = std::min(best_im, dim);
        best = j;
      }
    }
    const double res = est.real() - exact_grid[best].real();
    sq += res * res;
  }
  return std::sqrt(sq);
}

ObservationMatrix load_series_csv(const std::string& path,
                                  const LoadOptions& options) {
  auto rows = read_csv_cells(path);
  if (options.has_header && !rows.empty()) rows.erase(rows.begin());
  if (rows.empty()) throw std::runtime_error("empty CSV: " + path);

  const std::size_t cols = rows[0].size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw std::runtime_error("ragged CSV row " + std::to_string(i));
    for (std::size_t j = 0; j < cols; ++j)
      if (rows[i][j].empty())
        throw std::runtime_error("missing cell at row " + std::to_string(i) +
                                 ", column " + std::to_string(j));
  }

  // Rows are time, columns are channels; the model wants channels x time.
  const Index t = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(cols);
  Matrix m(d, t);
  for (Index i = 0; i < t; ++i)
    for (Index j = 0; j < d; ++j)
      m(j, i) = parse_cell(rows[static_cast<std::size_t>(i)]
                               [static_cast<std::size_t>(j)],
                           i, j);

  if (options.transform == LoadOptions::Transform::Log) {
    if ((m.array() <= 0.0).any())
      throw std::runtime_error("log transform requires strictly positive data");
    m = m.array().log().matrix();
  } else if (options.transform == LoadOptions::Transform::Log1p) {
    if ((m.array() <= -1.0).any())
      throw std::runtime_error("log1p transform requires data > -1");
    m = m.array().unaryExpr([](double v) { return std::log1p(v); }).matrix();
  }

  if (options.standardize) {
    for (Index j = 0; j < d; ++j) {
      const double mean = m.row(j).mean();
      m.row(j).array() -= mean;
      const double sd =
          std::sqrt(m.row(j).squaredNorm() / static_cast<double>(t));
      if (sd < 1e-14)
        throw std::runtime_error("constant channel " + std::to_string(j) +
                                 " cannot be standardized");
      m.row(j) /= sd;
    }
  }
  return m.cast<Complex>();
}

PhaseTable mode_phases(const ModeMatrix& modes,
                       const model::KoopmanSpectrum& eigenvalues,
                       double samples_per_unit) {
  require(modes.cols() == eigenvalues.discrete.size(),
          "mode_phases: mode/eigenvalue count mismatch");
  require(samples_per_unit > 0.0, "mode_phases: samples_per_unit must be > 0");
  constexpr double two_pi = 2.0 * std::numbers::pi;

  PhaseTable out;
  out.phases.resize(modes.rows(), modes.cols());
  for (Index k = 0; k < modes.cols(); ++k)
    for (Index i = 0; i < modes.rows(); ++i) {
      double a = std::arg(modes(i, k)) / two_pi;
      a -= std::floor(a);
      if (a >= 1.0) a = 0.0; // guard against floor rounding at the seam
      out.phases(i, k) = a;
    }

  out.frequencies.resize(eigenvalues.discrete.size());
  for (Index k = 0; k < eigenvalues.discrete.size(); ++k) {
    const Complex lambda = eigenvalues.discrete[k];
    if (lambda == Complex(0.0, 0.0))
      throw std::invalid_argument("mode_phases: zero eigenvalue");
    out.frequencies[k] = std::abs(std::arg(lambda)) / two_pi * samples_per_unit;
  }
  return out;
}

} // namespace gpkmd::data
