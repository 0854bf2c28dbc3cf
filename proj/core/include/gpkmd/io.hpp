// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef GPKMD_IO_HPP
#define GPKMD_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "gpkmd/kernels.hpp"
#include "gpkmd/types.hpp"

namespace gpkmd::io {

/// Writes a real matrix as CSV, rows = time (matrix columns), columns =
/// the given names (matrix rows). Values use 17 significant digits.
void write_csv(const std::string& path, const Matrix& m,
               const std::vector<std::string>& names);

/// Complex variant: each name becomes a `<name>_re,<name>_im` column pair.
void write_csv(const std::string& path, const CMatrix& m,
               const std::vector<std::string>& names);

/// Reads a real CSV produced by write_csv (header required); returns the
/// channels x time matrix.
Matrix read_csv(const std::string& path);

/// Reads a complex CSV with `_re`/`_im` column pairs.
CMatrix read_csv_complex(const std::string& path);

/// Default channel names ch1 ... chN (or a custom prefix).
std::vector<std::string> default_names(Index n,
                                       const std::string& prefix = "ch");

nlohmann::json to_json(const kernels::KernelSpec& spec);
kernels::KernelSpec kernel_from_json(const nlohmann::json& j);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

} // namespace gpkmd::io

#endif
