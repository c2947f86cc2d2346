// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "watersic/matcore.hpp"
#include "watersic/ziccore.hpp"

namespace watersic {

/// Symbol counts over a tight integer range: counts[min_symbol] and
/// counts[max_symbol] are both nonzero.
struct SymbolHistogram {
  std::int32_t min_symbol = 0;
  std::int32_t max_symbol = 0;
  std::vector<std::uint32_t> counts;  // indexed by symbol - min_symbol
  std::uint64_t total = 0;

  static SymbolHistogram from_counts(std::int32_t min_symbol, std::vector<std::uint32_t> counts);
  static SymbolHistogram from_codes(const CodeMatrix& z);
  /// Counts only the live columns.
  static SymbolHistogram from_codes(const CodeMatrix& z, const FeatureMask& live_cols);

  std::uint32_t count(std::int32_t symbol) const {
    return counts[static_cast<std::size_t>(symbol - min_symbol)];
  }
};

/// H = -sum p_v log2 p_v, bits per symbol.
double entropy_bits(const SymbolHistogram& hist);

/// R_eff = H + 16/a + 16/n (entropy plus 16-bit side-scalar overhead).
double effective_rate(double h, std::size_t a, std::size_t n);

struct Bitstream {
  std::vector<std::uint8_t> bytes;  // MSB-first within bytes, zero padded
  std::uint64_t bit_count = 0;
};

/// Canonical Huffman code: lengths per symbol over [min_symbol, max_symbol],
/// zero for symbols absent from the histogram. Codes are assigned in
/// (length, symbol) order, so identical histograms give bit-identical
/// streams.
class HuffmanTable {
 public:
  static HuffmanTable build(const SymbolHistogram& hist);
  static HuffmanTable from_lengths(std::int32_t min_symbol, std::vector<std::uint8_t> lengths);

  std::int32_t min_symbol() const { return min_symbol_; }
  const std::vector<std::uint8_t>& lengths() const { return lengths_; }
  std::uint8_t max_length() const { return max_length_; }

  /// Mean code length under the histogram, bits per symbol.
  double average_length(const SymbolHistogram& hist) const;

  Bitstream encode(const CodeMatrix& z) const;  // column-major symbol order
  CodeMatrix decode(const Bitstream& bits, std::size_t rows, std::size_t cols) const;

 private:
  void finalize();

  std::int32_t min_symbol_ = 0;
  std::vector<std::uint8_t> lengths_;
  std::uint8_t max_length_ = 0;
  // encode side: per-symbol canonical codes
  std::vector<std::uint64_t> codes_;
  // decode side: canonical first-code / first-index per length plus the
  // symbols sorted by (length, symbol)
  std::vector<std::int32_t> sorted_symbols_;
  std::vector<std::uint64_t> first_code_;
  std::vector<std::uint32_t> first_index_;
  std::vector<std::uint32_t> length_count_;
};

Bitstream huffman_encode(const CodeMatrix& z, const HuffmanTable& table);
CodeMatrix huffman_decode(const Bitstream& bits, const HuffmanTable& table, std::size_t rows,
                          std::size_t cols);

/// (entropy, huffman bits per symbol) for the matrix's own histogram.
std::pair<double, double> codec_rate_check(const CodeMatrix& z);

/// Mean of the per-column empirical entropies, the rate notion of the
/// per-column coding scheme.
double column_entropy_mean(const CodeMatrix& z);

/// Per-column tables and streams (the per-column coding mode).
struct ColumnCode {
  HuffmanTable table;
  Bitstream bits;
};
std::vector<ColumnCode> huffman_encode_columns(const CodeMatrix& z);
CodeMatrix huffman_decode_columns(const std::vector<ColumnCode>& columns, std::size_t rows);

}  // namespace watersic
