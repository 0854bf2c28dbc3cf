// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#include "gpkmd/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gpkmd::io {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows; // one per time step
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size())
      throw std::runtime_error("ragged CSV in " + path);
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::size_t pos = 0;
      row[i] = std::stod(cells[i], &pos);
      if (pos != cells[i].size())
        throw std::runtime_error("non-numeric cell in " + path);
    }
    t.rows.push_back(std::move(row));
  }
  if (first) throw std::runtime_error("empty CSV: " + path);
  return t;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void check_names(Index rows, std::size_t n) {
  if (static_cast<std::size_t>(rows) != n)
    throw std::invalid_argument("write_csv: name count does not match rows");
}

} // namespace

std::vector<std::string> default_names(Index n, const std::string& prefix) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (Index i = 1; i <= n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

void write_csv(const std::string& path, const Matrix& m,
               const std::vector<std::string>& names) {
  check_names(m.rows(), names.size());
  auto out = open_out(path);
  for (std::size_t i = 0; i < names.size(); ++i)
    out << (i ? "," : "") << names[i];
  out << "\n";
  for (Index t = 0; t < m.cols(); ++t) {
    for (Index i = 0; i < m.rows(); ++i)
      out << (i ? "," : "") << fmt(m(i, t));
    out << "\n";
  }
}

void write_csv(const std::string& path, const CMatrix& m,
               const std::vector<std::string>& names) {
  check_names(m.rows(), names.size());
  auto out = open_out(path);
  for (std::size_t i = 0; i < names.size(); ++i)
    out << (i ? "," : "") << names[i] << "_re," << names[i] << "_im";
  out << "\n";
  for (Index t = 0; t < m.cols(); ++t) {
    for (Index i = 0; i < m.rows(); ++i)
      out << (i ? "," : "") << fmt(m(i, t).real()) << ","
          << fmt(m(i, t).imag());
    out << "\n";
  }
}

Matrix read_csv(const std::string& path) {
  const Table t = read_table(path);
  Matrix m(static_cast<Index>(t.header.size()),
           static_cast<Index>(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.header.size(); ++c)
      m(static_cast<Index>(c), static_cast<Index>(r)) = t.rows[r][c];
  return m;
}

CMatrix read_csv_complex(const std::string& path) {
  const Table t = read_table(path);
  if (t.header.size() % 2 != 0)
    throw std::runtime_error("complex CSV needs paired _re/_im columns: " +
                             path);
  const std::size_t d = t.header.size() / 2;
  for (std::size_t i = 0; i < d; ++i) {
    const std::string& re = t.header[2 * i];
    const std::string& im = t.header[2 * i + 1];
    if (re.size() < 3 || re.substr(re.size() - 3) != "_re" ||
        im.size() < 3 || im.substr(im.size() - 3) != "_im" ||
        re.substr(0, re.size() - 3) != im.substr(0, im.size() - 3))
      throw std::runtime_error("complex CSV header mismatch at column " +
                               std::to_string(2 * i) + ": " + path);
  }
  CMatrix m(static_cast<Index>(d), static_cast<Index>(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < d; ++c)
      m(static_cast<Index>(c), static_cast<Index>(r)) =
          Complex(t.rows[r][2 * c], t.rows[r][2 * c + 1]);
  return m;
}

nlohmann::json to_json(const kernels::KernelSpec& spec) {
  return {{"variant", kernels::to_string(spec.variant)},
          {"rbf_variance", spec.rbf_variance},
          {"rbf_lengthscale", spec.rbf_lengthscale},
          {"linear_variance", spec.linear_variance}};
}

kernels::KernelSpec kernel_from_json(const nlohmann::json& j) {
  kernels::KernelSpec spec;
  spec.variant =
      kernels::variant_from_string(j.at("variant").get<std::string>());
  spec.rbf_variance = j.value("rbf_variance", 1.0);
  spec.rbf_lengthscale = j.value("rbf_lengthscale", 1.0);
  spec.linear_variance = j.value("linear_variance", 1.0);
  spec.validate();
  return spec;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

} // namespace gpkmd::io
