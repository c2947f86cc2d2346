// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "watersic/matcore.hpp"

namespace watersic {

// WSMX binary matrix file, little-endian:
//   magic "WSMX" | u32 version (=1) | u8 dtype (0 = float64) |
//   u64 rows | u64 cols | rows*cols float64, row-major.

void write_matrix(const std::string& path, const DenseMatrix& m);
DenseMatrix read_matrix(const std::string& path);

/// Reads a square WSMX file into a symmetry-enforced container.
SymmetricMatrix read_symmetric(const std::string& path);

}  // namespace watersic
