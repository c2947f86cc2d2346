// SPDX-License-Identifier: Apache-2.0
#include "watersic/entropy_codec.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace watersic {

namespace {

constexpr std::size_t kMaxRange = std::size_t{1} << 26;
constexpr std::uint8_t kMaxLength = 63;

class BitWriter {
 public:
  void put(std::uint64_t code, std::uint8_t len) {
    for (int b = len - 1; b >= 0; --b) {
      if (bit_ == 0) bytes_.push_back(0);
      if ((code >> b) & 1u) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> bit_);
      bit_ = (bit_ + 1) & 7;
      ++count_;
    }
  }
  Bitstream take() {
    Bitstream s;
    s.bytes = std::move(bytes_);
    s.bit_count = count_;
    return s;
  }

 private:
  std::vector<std::uint8_t> bytes_;
  unsigned bit_ = 0;
  std::uint64_t count_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const Bitstream& s) : s_(s) {}
  int next() {
    if (pos_ >= s_.bit_count) return -1;
    const std::uint8_t byte = s_.bytes[pos_ >> 3];
    const int bit = (byte >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return bit;
  }

 private:
  const Bitstream& s_;
  std::uint64_t pos_ = 0;
};

}  // namespace

SymbolHistogram SymbolHistogram::from_counts(std::int32_t min_symbol,
                                             std::vector<std::uint32_t> counts) {
  // trim to the tight range
  std::size_t lo = 0, hi = counts.size();
  while (lo < hi && counts[lo] == 0) ++lo;
  while (hi > lo && counts[hi - 1] == 0) --hi;
  if (lo == hi) throw EmptyHistogram("SymbolHistogram: all counts zero");
  SymbolHistogram h;
  h.min_symbol = min_symbol + static_cast<std::int32_t>(lo);
  h.max_symbol = min_symbol + static_cast<std::int32_t>(hi - 1);
  h.counts.assign(counts.begin() + static_cast<std::ptrdiff_t>(lo),
                  counts.begin() + static_cast<std::ptrdiff_t>(hi));
  for (std::uint32_t c : h.counts) h.total += c;
  return h;
}

namespace {

SymbolHistogram histogram_of(const CodeMatrix& z, const FeatureMask* live_cols) {
  if (z.rows == 0 || z.cols == 0) throw EmptyHistogram("histogram: empty code matrix");
  std::int32_t mn = 0, mx = 0;
  bool seen = false;
  auto visit = [&](auto&& fn) {
    for (std::size_t j = 0; j < z.cols; ++j) {
      if (live_cols && !live_cols->live(j)) continue;
      for (std::size_t i = 0; i < z.rows; ++i) fn(z(i, j));
    }
  };
  visit([&](std::int32_t v) {
    if (!seen) {
      mn = mx = v;
      seen = true;
    } else {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
  });
  if (!seen) throw EmptyHistogram("histogram: no live symbols");
  const std::size_t range =
      static_cast<std::size_t>(static_cast<std::int64_t>(mx) - mn + 1);
  if (range > kMaxRange) throw InvalidArgument("histogram: symbol range too large");
  std::vector<std::uint32_t> counts(range, 0);
  visit([&](std::int32_t v) {
    std::uint32_t& c = counts[static_cast<std::size_t>(v - mn)];
    if (c == std::numeric_limits<std::uint32_t>::max())
      throw InvalidArgument("histogram: symbol count overflows u32");
    ++c;
  });
  return SymbolHistogram::from_counts(mn, std::move(counts));
}

}  // namespace

SymbolHistogram SymbolHistogram::from_codes(const CodeMatrix& z) {
  return histogram_of(z, nullptr);
}

SymbolHistogram SymbolHistogram::from_codes(const CodeMatrix& z, const FeatureMask& live_cols) {
  if (live_cols.dim() != z.cols)
    throw DimensionMismatch("histogram: mask.dim != cols");
  return histogram_of(z, &live_cols);
}

double entropy_bits(const SymbolHistogram& hist) {
  if (hist.total == 0) throw EmptyHistogram("entropy_bits: empty histogram");
  const double total = static_cast<double>(hist.total);
  double h = 0.0;
  for (std::uint32_t c : hist.counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

double effective_rate(double h, std::size_t a, std::size_t n) {
  if (a == 0 || n == 0) throw InvalidArgument("effective_rate: a, n must be >= 1");
  return h + 16.0 / static_cast<double>(a) + 16.0 / static_cast<double>(n);
}

HuffmanTable HuffmanTable::build(const SymbolHistogram& hist) {
  struct Leaf {
    std::uint64_t weight;
    std::int32_t symbol;
  };
  std::vector<Leaf> leaves;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    if (hist.counts[i] > 0)
      leaves.push_back({hist.counts[i], hist.min_symbol + static_cast<std::int32_t>(i)});
  }
  if (leaves.empty()) throw EmptyHistogram("HuffmanTable: empty histogram");

  std::vector<std::uint8_t> lengths(hist.counts.size(), 0);
  if (leaves.size() == 1) {
    // Degenerate alphabet keeps a 1-bit code so the stream stays
    // self-delimiting and deterministic.
    lengths[static_cast<std::size_t>(leaves[0].symbol - hist.min_symbol)] = 1;
    return from_lengths(hist.min_symbol, std::move(lengths));
  }

  std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) {
    return a.weight != b.weight ? a.weight < b.weight : a.symbol < b.symbol;
  });

  // Two-queue merge; depths recovered by walking parent links.
  struct Node {
    std::uint64_t weight;
    int parent = -1;
    std::int32_t symbol = 0;
    bool leaf = false;
  };
  std::vector<Node> nodes;
  nodes.reserve(2 * leaves.size() - 1);
  std::deque<int> q1, q2;
  for (const Leaf& l : leaves) {
    nodes.push_back({l.weight, -1, l.symbol, true});
    q1.push_back(static_cast<int>(nodes.size()) - 1);
  }
  auto pop_min = [&]() {
    int idx;
    if (q2.empty() || (!q1.empty() && nodes[static_cast<std::size_t>(q1.front())].weight <=
                                          nodes[static_cast<std::size_t>(q2.front())].weight)) {
      idx = q1.front();
      q1.pop_front();
    } else {
      idx = q2.front();
      q2.pop_front();
    }
    return idx;
  };
  while (q1.size() + q2.size() > 1) {
    const int a = pop_min();
    const int b = pop_min();
    nodes.push_back({nodes[static_cast<std::size_t>(a)].weight +
                         nodes[static_cast<std::size_t>(b)].weight,
                     -1, 0, false});
    const int parent = static_cast<int>(nodes.size()) - 1;
    nodes[static_cast<std::size_t>(a)].parent = parent;
    nodes[static_cast<std::size_t>(b)].parent = parent;
    q2.push_back(parent);
  }
  for (const Node& node : nodes) {
    if (!node.leaf) continue;
    std::uint8_t depth = 0;
    for (int p = node.parent; p != -1; p = nodes[static_cast<std::size_t>(p)].parent) ++depth;
    if (depth > kMaxLength) throw InvalidArgument("HuffmanTable: code length exceeds 63 bits");
    lengths[static_cast<std::size_t>(node.symbol - hist.min_symbol)] = depth;
  }
  return from_lengths(hist.min_symbol, std::move(lengths));
}

HuffmanTable HuffmanTable::from_lengths(std::int32_t min_symbol,
                                        std::vector<std::uint8_t> lengths) {
  HuffmanTable t;
  t.min_symbol_ = min_symbol;
  t.lengths_ = std::move(lengths);
  t.finalize();
  return t;
}

void HuffmanTable::finalize() {
  max_length_ = 0;
  for (std::uint8_t l : lengths_) max_length_ = std::max(max_length_, l);
  if (max_length_ == 0) throw EmptyHistogram("HuffmanTable: no coded symbols");
  if (max_length_ > kMaxLength) throw InvalidCode("HuffmanTable: length exceeds 63 bits");
  {  // the lengths must satisfy the Kraft inequality to form a prefix code
    unsigned __int128 kraft = 0;
    for (std::uint8_t l : lengths_) {
      if (l > 0) kraft += static_cast<unsigned __int128>(1) << (64 - l);
    }
    if (kraft > (static_cast<unsigned __int128>(1) << 64))
      throw InvalidCode("HuffmanTable: lengths violate the Kraft inequality");
  }

  // canonical order: lengths non-decreasing, ties by symbol value
  sorted_symbols_.clear();
  for (std::size_t i = 0; i < lengths_.size(); ++i) {
    if (lengths_[i] > 0) sorted_symbols_.push_back(min_symbol_ + static_cast<std::int32_t>(i));
  }
  std::stable_sort(sorted_symbols_.begin(), sorted_symbols_.end(),
                   [&](std::int32_t a, std::int32_t b) {
                     const std::uint8_t la = lengths_[static_cast<std::size_t>(a - min_symbol_)];
                     const std::uint8_t lb = lengths_[static_cast<std::size_t>(b - min_symbol_)];
                     return la != lb ? la < lb : a < b;
                   });

  length_count_.assign(max_length_ + 1, 0);
  for (std::uint8_t l : lengths_) {
    if (l > 0) ++length_count_[l];
  }
  first_code_.assign(max_length_ + 1, 0);
  first_index_.assign(max_length_ + 1, 0);
  std::uint64_t code = 0;
  std::uint32_t index = 0;
  for (std::uint8_t len = 1; len <= max_length_; ++len) {
    first_code_[len] = code;
    first_index_[len] = index;
    code = (code + length_count_[len]) << 1;
    index += length_count_[len];
  }

  codes_.assign(lengths_.size(), 0);
  std::uint64_t next = 0;
  std::uint8_t prev_len = 0;
  for (std::int32_t sym : sorted_symbols_) {
    const std::uint8_t len = lengths_[static_cast<std::size_t>(sym - min_symbol_)];
    next <<= (len - prev_len);
    codes_[static_cast<std::size_t>(sym - min_symbol_)] = next;
    ++next;
    prev_len = len;
  }
}

double HuffmanTable::average_length(const SymbolHistogram& hist) const {
  if (hist.total == 0) throw EmptyHistogram("average_length: empty histogram");
  double bits = 0.0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    if (hist.counts[i] == 0) continue;
    const std::int32_t sym = hist.min_symbol + static_cast<std::int32_t>(i);
    const std::size_t k = static_cast<std::size_t>(sym - min_symbol_);
    if (sym < min_symbol_ || k >= lengths_.size() || lengths_[k] == 0)
      throw UnknownSymbol("average_length: symbol " + std::to_string(sym) + " not in table");
    bits += static_cast<double>(hist.counts[i]) * lengths_[k];
  }
  return bits / static_cast<double>(hist.total);
}

Bitstream HuffmanTable::encode(const CodeMatrix& z) const {
  BitWriter writer;
  for (std::size_t j = 0; j < z.cols; ++j) {
    for (std::size_t i = 0; i < z.rows; ++i) {
      const std::int32_t sym = z(i, j);
      const std::int64_t k = static_cast<std::int64_t>(sym) - min_symbol_;
      if (k < 0 || k >= static_cast<std::int64_t>(lengths_.size()) ||
          lengths_[static_cast<std::size_t>(k)] == 0)
        throw UnknownSymbol("encode: symbol " + std::to_string(sym) + " not in table");
      writer.put(codes_[static_cast<std::size_t>(k)], lengths_[static_cast<std::size_t>(k)]);
    }
  }
  return writer.take();
}

CodeMatrix HuffmanTable::decode(const Bitstream& bits, std::size_t rows, std::size_t cols) const {
  if (bits.bit_count > 8 * bits.bytes.size())
    throw TruncatedStream("decode: bit count exceeds the buffer");
  CodeMatrix z(rows, cols);
  BitReader reader(bits);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      std::uint64_t code = 0;
      std::uint8_t len = 0;
      for (;;) {
        const int bit = reader.next();
        if (bit < 0) throw TruncatedStream("decode: bitstream ended mid-symbol");
        code = (code << 1) | static_cast<std::uint32_t>(bit);
        ++len;
        if (len > max_length_) throw InvalidCode("decode: no code of this prefix");
        if (length_count_[len] > 0 && code >= first_code_[len] &&
            code - first_code_[len] < length_count_[len]) {
          z.at(i, j) = sorted_symbols_[first_index_[len] + (code - first_code_[len])];
          break;
        }
      }
    }
  }
  return z;
}

Bitstream huffman_encode(const CodeMatrix& z, const HuffmanTable& table) {
  return table.encode(z);
}

CodeMatrix huffman_decode(const Bitstream& bits, const HuffmanTable& table, std::size_t rows,
                          std::size_t cols) {
  return table.decode(bits, rows, cols);
}

std::pair<double, double> codec_rate_check(const CodeMatrix& z) {
  const SymbolHistogram hist = SymbolHistogram::from_codes(z);
  const HuffmanTable table = HuffmanTable::build(hist);
  return {entropy_bits(hist), table.average_length(hist)};
}

double column_entropy_mean(const CodeMatrix& z) {
  if (z.cols == 0) throw EmptyHistogram("column_entropy_mean: no columns");
  double acc = 0.0;
  CodeMatrix col(z.rows, 1);
  for (std::size_t j = 0; j < z.cols; ++j) {
    for (std::size_t i = 0; i < z.rows; ++i) col.at(i, 0) = z(i, j);
    acc += entropy_bits(SymbolHistogram::from_codes(col));
  }
  return acc / static_cast<double>(z.cols);
}

std::vector<ColumnCode> huffman_encode_columns(const CodeMatrix& z) {
  std::vector<ColumnCode> out;
  out.reserve(z.cols);
  CodeMatrix col(z.rows, 1);
  for (std::size_t j = 0; j < z.cols; ++j) {
    for (std::size_t i = 0; i < z.rows; ++i) col.at(i, 0) = z(i, j);
    ColumnCode cc{HuffmanTable::build(SymbolHistogram::from_codes(col)), {}};
    cc.bits = cc.table.encode(col);
    out.push_back(std::move(cc));
  }
  return out;
}

CodeMatrix huffman_decode_columns(const std::vector<ColumnCode>& columns, std::size_t rows) {
  CodeMatrix z(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const CodeMatrix col = columns[j].table.decode(columns[j].bits, rows, 1);
    for (std::size_t i = 0; i < rows; ++i) z.at(i, j) = col(i, 0);
  }
  return z;
}

}  // namespace watersic
