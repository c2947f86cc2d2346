// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>

#include "test_support.hpp"
#include "watersic/entropy_codec.hpp"

using namespace watersic;
using namespace watersic::test;

namespace {

CodeMatrix random_codes(std::size_t rows, std::size_t cols, Rng& rng, double sigma = 4.0) {
  CodeMatrix z(rows, cols);
  for (auto& v : z.codes) v = static_cast<std::int32_t>(std::llround(sigma * rng.normal()));
  return z;
}

// Kraft sum in units of 2^-64; exact for lengths <= 63.
unsigned __int128 kraft_scaled(const HuffmanTable& t) {
  unsigned __int128 acc = 0;
  for (std::uint8_t len : t.lengths()) {
    if (len > 0) acc += static_cast<unsigned __int128>(1) << (64 - len);
  }
  return acc;
}

}  // namespace

TEST_CASE("entropy of a single symbol is zero") {
  const SymbolHistogram h = SymbolHistogram::from_counts(5, {42});
  CHECK(entropy_bits(h) == 0.0);
}

TEST_CASE("entropy of the dyadic three-symbol source is 1.5 bits") {
  const SymbolHistogram h = SymbolHistogram::from_counts(-1, {1, 2, 1});
  CHECK(entropy_bits(h) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("entropy of four equiprobable symbols is 2 bits") {
  const SymbolHistogram h = SymbolHistogram::from_counts(0, {3, 3, 3, 3});
  CHECK(entropy_bits(h) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("entropy is invariant under symbol relabeling") {
  Rng rng(91);
  std::vector<std::uint32_t> counts{7, 1, 9, 4, 2};
  const double h1 = entropy_bits(SymbolHistogram::from_counts(-3, counts));
  std::reverse(counts.begin(), counts.end());
  const double h2 = entropy_bits(SymbolHistogram::from_counts(100, counts));
  CHECK(h1 == doctest::Approx(h2).epsilon(1e-15));
}

TEST_CASE("histogram keeps a tight range") {
  const SymbolHistogram h = SymbolHistogram::from_counts(-5, {0, 0, 3, 1, 0, 2, 0});
  CHECK(h.min_symbol == -3);
  CHECK(h.max_symbol == 0);
  CHECK(h.total == 6);
  CHECK(h.counts.front() > 0);
  CHECK(h.counts.back() > 0);
}

TEST_CASE("empty histograms are rejected") {
  CHECK_THROWS_AS(SymbolHistogram::from_counts(0, {0, 0}), EmptyHistogram);
}

TEST_CASE("effective_rate arithmetic") {
  CHECK(effective_rate(2.0, 1024, 2048) == doctest::Approx(2.0234375).epsilon(1e-15));
  CHECK(effective_rate(3.0, 1u << 26, 1u << 26) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(effective_rate(0.0, 16, 16) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("dyadic source gets the optimal code") {
  const SymbolHistogram h = SymbolHistogram::from_counts(-1, {1, 2, 1});
  const HuffmanTable t = HuffmanTable::build(h);
  CHECK(t.lengths()[0] == 2);  // symbol -1
  CHECK(t.lengths()[1] == 1);  // symbol 0
  CHECK(t.lengths()[2] == 2);  // symbol +1
  CHECK(t.average_length(h) == doctest::Approx(1.5));
  CHECK(t.average_length(h) == doctest::Approx(entropy_bits(h)));
}

TEST_CASE("single-symbol alphabets get a one-bit code and round-trip") {
  CodeMatrix z(4, 3);
  for (auto& v : z.codes) v = -7;
  const SymbolHistogram h = SymbolHistogram::from_codes(z);
  const HuffmanTable t = HuffmanTable::build(h);
  CHECK(t.lengths().size() == 1);
  CHECK(t.lengths()[0] == 1);
  const Bitstream bits = t.encode(z);
  CHECK(bits.bit_count == 12);
  const CodeMatrix back = t.decode(bits, 4, 3);
  CHECK(back.codes == z.codes);
  const auto [entropy, avg] = codec_rate_check(z);
  CHECK(entropy == 0.0);
  CHECK(avg == 1.0);
}

TEST_CASE("round-trip and bounds over random code matrices") {
  Rng rng(92);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t rows = 1 + rng.next_u64() % 40;
    const std::size_t cols = 1 + rng.next_u64() % 20;
    const CodeMatrix z = random_codes(rows, cols, rng, rng.uniform(0.1, 8.0));
    const SymbolHistogram h = SymbolHistogram::from_codes(z);
    const HuffmanTable t = HuffmanTable::build(h);
    const Bitstream bits = t.encode(z);
    const CodeMatrix back = t.decode(bits, rows, cols);
    CHECK(back.codes == z.codes);
    const double entropy = entropy_bits(h);
    const double avg = t.average_length(h);
    CHECK(avg >= entropy - 1e-12);
    if (h.counts.size() > 1) CHECK(avg < entropy + 1.0);
    // Kraft equality for non-degenerate tables
    std::size_t coded = 0;
    for (std::uint8_t len : t.lengths()) coded += len > 0;
    if (coded >= 2) {
      CHECK(kraft_scaled(t) == (static_cast<unsigned __int128>(1) << 64));
    }
  }
}

TEST_CASE("canonical tables and streams are deterministic") {
  Rng rng1(93), rng2(93);
  const CodeMatrix z1 = random_codes(32, 16, rng1);
  const CodeMatrix z2 = random_codes(32, 16, rng2);
  const HuffmanTable t1 = HuffmanTable::build(SymbolHistogram::from_codes(z1));
  const HuffmanTable t2 = HuffmanTable::build(SymbolHistogram::from_codes(z2));
  CHECK(t1.lengths() == t2.lengths());
  CHECK(t1.min_symbol() == t2.min_symbol());
  const Bitstream b1 = t1.encode(z1);
  const Bitstream b2 = t2.encode(z2);
  CHECK(b1.bytes == b2.bytes);
  CHECK(b1.bit_count == b2.bit_count);
}

TEST_CASE("canonical ordering: lengths non-decreasing, ties by symbol value") {
  Rng rng(94);
  const CodeMatrix z = random_codes(64, 8, rng);
  const SymbolHistogram h = SymbolHistogram::from_codes(z);
  const HuffmanTable t = HuffmanTable::build(h);
  // more frequent symbols never get longer codes
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    for (std::size_t j = 0; j < h.counts.size(); ++j) {
      if (h.counts[i] == 0 || h.counts[j] == 0) continue;
      if (h.counts[i] > h.counts[j]) CHECK(t.lengths()[i] <= t.lengths()[j]);
    }
  }
}

TEST_CASE("encode rejects symbols missing from the table") {
  const SymbolHistogram h = SymbolHistogram::from_counts(0, {1, 1});
  const HuffmanTable t = HuffmanTable::build(h);
  CodeMatrix z(1, 1);
  z.at(0, 0) = 7;
  CHECK_THROWS_AS(t.encode(z), UnknownSymbol);
}

TEST_CASE("decode detects truncated streams") {
  Rng rng(95);
  const CodeMatrix z = random_codes(8, 8, rng);
  const HuffmanTable t = HuffmanTable::build(SymbolHistogram::from_codes(z));
  Bitstream bits = t.encode(z);
  bits.bit_count /= 2;
  bits.bytes.resize((bits.bit_count + 7) / 8);
  CHECK_THROWS_AS(t.decode(bits, 8, 8), TruncatedStream);
}

TEST_CASE("decode detects invalid codes") {
  // single-symbol table: only the bit 0 is a valid code
  CodeMatrix z(2, 1);
  const HuffmanTable t = HuffmanTable::build(SymbolHistogram::from_codes(z));
  Bitstream bits;
  bits.bytes = {0xFF};
  bits.bit_count = 8;
  CHECK_THROWS_AS(t.decode(bits, 2, 1), InvalidCode);
}

TEST_CASE("length tables violating the Kraft inequality are rejected") {
  // five symbols of length 1 cannot form a prefix code
  CHECK_THROWS_AS(HuffmanTable::from_lengths(0, {1, 1, 1, 1, 1}), InvalidCode);
  // a valid hand-built table is accepted
  const HuffmanTable t = HuffmanTable::from_lengths(0, {1, 2, 2});
  CodeMatrix z(1, 3);
  z.at(0, 0) = 0;
  z.at(0, 1) = 1;
  z.at(0, 2) = 2;
  CHECK(t.decode(t.encode(z), 1, 3).codes == z.codes);
}

TEST_CASE("codec_rate_check stays within the Shannon bound") {
  Rng rng(96);
  for (int trial = 0; trial < 20; ++trial) {
    const CodeMatrix z = random_codes(24, 24, rng, rng.uniform(0.5, 6.0));
    const auto [entropy, avg] = codec_rate_check(z);
    const SymbolHistogram h = SymbolHistogram::from_codes(z);
    std::size_t coded = 0;
    for (std::uint32_t c : h.counts) coded += c > 0;
    if (coded >= 2) {
      CHECK(avg - entropy >= -1e-12);
      CHECK(avg - entropy < 1.0);
    }
  }
}

TEST_CASE("per-column coding round-trips and respects per-column bounds") {
  Rng rng(97);
  const std::size_t rows = 48, cols = 6;
  // columns with very different scales, as the waterfilling spacings induce
  CodeMatrix z(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    const double sigma = std::pow(2.0, static_cast<double>(j)) * 0.25;
    for (std::size_t i = 0; i < rows; ++i) {
      z.at(i, j) = static_cast<std::int32_t>(std::llround(sigma * rng.normal()));
    }
  }
  const std::vector<ColumnCode> columns = huffman_encode_columns(z);
  const CodeMatrix back = huffman_decode_columns(columns, rows);
  CHECK(back.codes == z.codes);
  // per-column average lengths respect the Shannon bound columnwise
  for (std::size_t j = 0; j < cols; ++j) {
    CodeMatrix col(rows, 1);
    for (std::size_t i = 0; i < rows; ++i) col.at(i, 0) = z(i, j);
    const SymbolHistogram h = SymbolHistogram::from_codes(col);
    std::size_t coded = 0;
    for (std::uint32_t c : h.counts) coded += c > 0;
    const double avg = columns[j].table.average_length(h);
    if (coded >= 2) CHECK(avg < entropy_bits(h) + 1.0);
  }
  // the pooled entropy of a scale mixture is at least the per-column mean
  CHECK(entropy_bits(SymbolHistogram::from_codes(z)) >= column_entropy_mean(z) - 1e-12);
}

TEST_CASE("histogram over live columns only") {
  CodeMatrix z(2, 3);
  z.at(0, 0) = 1;
  z.at(1, 0) = 1;
  z.at(0, 1) = 99;
  z.at(1, 1) = 99;
  z.at(0, 2) = 2;
  z.at(1, 2) = 2;
  const FeatureMask mask(std::vector<bool>{true, false, true});
  const SymbolHistogram h = SymbolHistogram::from_codes(z, mask);
  CHECK(h.min_symbol == 1);
  CHECK(h.max_symbol == 2);
  CHECK(h.total == 4);
}
