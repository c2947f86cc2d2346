// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "watersic/matcore.hpp"
#include "watersic/pipeline.hpp"
#include "watersic/ziccore.hpp"

namespace watersic {

// WSQZ layer container, little-endian. Layout (all offsets sequential):
//   magic "WSQZ" | u32 version (=1) | u64 a | u64 n |
//   ceil(n/8) bytes column mask (bit j%8 of byte j/8 set <=> column j live) |
//   live_count x u16 fused column scales (bfloat16 of alpha_j * gamma_j) |
//   a x u16 row gains (bfloat16) |
//   i32 table min_symbol | u32 table symbol count K | K x u8 code lengths |
//   u64 bit count | ceil(bits/8) bytes entropy-coded live codes,
//     column-major | u32 CRC32 of every preceding byte.

/// bfloat16 with round-to-nearest-even on the dropped mantissa bits.
std::uint16_t to_bf16(float v);
float from_bf16(std::uint16_t bits);

std::uint32_t crc32(const std::uint8_t* data, std::size_t size);

std::vector<std::uint8_t> encode_container(const QuantizedLayer& layer);

struct DecodedLayer {
  CodeMatrix codes;               // full width, zero dead columns
  std::vector<double> scales;     // fused alpha*gamma per column, 0 at dead
  std::vector<double> row_gains;  // length a
  FeatureMask mask;
};

DecodedLayer decode_container(const std::vector<std::uint8_t>& bytes);

/// W_hat[i][j] = row_gains[i] * codes[i][j] * scales[j].
DenseMatrix dequantize(const std::vector<std::uint8_t>& bytes);

}  // namespace watersic
