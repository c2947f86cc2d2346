// SPDX-License-Identifier: Apache-2.0
#include "watersic/container.hpp"

#include <array>
#include <cmath>
#include <cstring>

#include "watersic/entropy_codec.hpp"

namespace watersic {

namespace {

constexpr char kMagic[4] = {'W', 'S', 'Q', 'Z'};
constexpr std::uint32_t kVersion = 1;

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const std::size_t at = bytes_.size();
    bytes_.resize(at + sizeof(T));
    std::memcpy(bytes_.data() + at, &v, sizeof(T));
  }
  void put_bytes(const std::uint8_t* data, std::size_t size) {
    bytes_.insert(bytes_.end(), data, data + size);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw TruncatedStream("WSQZ: buffer too short");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  const std::uint8_t* get_bytes(std::size_t size) {
    if (pos_ + size > bytes_.size()) throw TruncatedStream("WSQZ: buffer too short");
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += size;
    return p;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint16_t to_bf16(float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  if (std::isnan(v)) return 0x7FC0u;
  const std::uint32_t lsb = (bits >> 16) & 1u;
  bits += 0x7FFFu + lsb;
  return static_cast<std::uint16_t>(bits >> 16);
}

float from_bf16(std::uint16_t bits) {
  const std::uint32_t full = static_cast<std::uint32_t>(bits) << 16;
  float v;
  std::memcpy(&v, &full, 4);
  return v;
}

std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
  static const std::array<std::uint32_t, 256> table = make_crc_table();
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> encode_container(const QuantizedLayer& layer) {
  const std::size_t a = layer.codes.rows;
  const std::size_t n = layer.codes.cols;
  if (layer.alphas.size() != n || layer.gammas.size() != n || layer.row_gains.size() != a ||
      layer.mask.dim() != n)
    throw DimensionMismatch("encode_container: layer fields disagree in shape");

  const auto live = layer.mask.live_indices();
  CodeMatrix live_codes(a, live.size());
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < live.size(); ++j) live_codes.at(i, j) = layer.codes(i, live[j]);
  }
  const SymbolHistogram hist = SymbolHistogram::from_codes(live_codes);
  const HuffmanTable table = HuffmanTable::build(hist);
  const Bitstream stream = table.encode(live_codes);

  Writer w;
  w.put_bytes(reinterpret_cast<const std::uint8_t*>(kMagic), 4);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint64_t>(a);
  w.put<std::uint64_t>(n);
  std::vector<std::uint8_t> mask_bytes((n + 7) / 8, 0);
  for (std::size_t j = 0; j < n; ++j) {
    if (layer.mask.live(j)) mask_bytes[j / 8] |= static_cast<std::uint8_t>(1u << (j % 8));
  }
  w.put_bytes(mask_bytes.data(), mask_bytes.size());
  for (std::size_t j : live) {
    w.put<std::uint16_t>(to_bf16(static_cast<float>(layer.alphas[j] * layer.gammas[j])));
  }
  for (std::size_t i = 0; i < a; ++i) {
    w.put<std::uint16_t>(to_bf16(static_cast<float>(layer.row_gains[i])));
  }
  w.put<std::int32_t>(table.min_symbol());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(table.lengths().size()));
  w.put_bytes(table.lengths().data(), table.lengths().size());
  w.put<std::uint64_t>(stream.bit_count);
  w.put_bytes(stream.bytes.data(), stream.bytes.size());
  w.put<std::uint32_t>(crc32(w.bytes().data(), w.bytes().size()));
  return std::move(w.bytes());
}

DecodedLayer decode_container(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 + 4 + 8 + 8 + 4) throw TruncatedStream("WSQZ: buffer too short");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw BadMagic("WSQZ: bad magic");
  const std::uint32_t stored_crc =
      static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
      static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8 |
      static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16 |
      static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24;
  if (crc32(bytes.data(), bytes.size() - 4) != stored_crc)
    throw ChecksumFailure("WSQZ: checksum mismatch");

  Reader r(bytes);
  r.get_bytes(4);  // magic
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion)
    throw VersionMismatch("WSQZ: unsupported version " + std::to_string(version));
  const auto a = static_cast<std::size_t>(r.get<std::uint64_t>());
  const auto n = static_cast<std::size_t>(r.get<std::uint64_t>());

  const std::uint8_t* mask_bytes = r.get_bytes((n + 7) / 8);
  std::vector<bool> live(n);
  for (std::size_t j = 0; j < n; ++j) live[j] = (mask_bytes[j / 8] >> (j % 8)) & 1u;
  FeatureMask mask(std::move(live));

  const auto idx = mask.live_indices();
  std::vector<double> scales(n, 0.0);
  for (std::size_t j : idx) scales[j] = from_bf16(r.get<std::uint16_t>());
  std::vector<double> row_gains(a);
  for (std::size_t i = 0; i < a; ++i) row_gains[i] = from_bf16(r.get<std::uint16_t>());

  const auto min_symbol = r.get<std::int32_t>();
  const auto table_size = r.get<std::uint32_t>();
  const std::uint8_t* length_bytes = r.get_bytes(table_size);
  const HuffmanTable table = HuffmanTable::from_lengths(
      min_symbol, std::vector<std::uint8_t>(length_bytes, length_bytes + table_size));

  Bitstream stream;
  stream.bit_count = r.get<std::uint64_t>();
  const std::size_t stream_bytes = static_cast<std::size_t>((stream.bit_count + 7) / 8);
  const std::uint8_t* payload = r.get_bytes(stream_bytes);
  stream.bytes.assign(payload, payload + stream_bytes);

  const CodeMatrix live_codes = table.decode(stream, a, idx.size());
  DecodedLayer out{CodeMatrix(a, n), std::move(scales), std::move(row_gains), std::move(mask)};
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) out.codes.at(i, idx[j]) = live_codes(i, j);
  }
  return out;
}

DenseMatrix dequantize(const std::vector<std::uint8_t>& bytes) {
  const DecodedLayer layer = decode_container(bytes);
  DenseMatrix w(layer.codes.rows, layer.codes.cols);
  for (std::size_t i = 0; i < layer.codes.rows; ++i) {
    const double t = layer.row_gains[i];
    double* wi = w.row(i);
    for (std::size_t j = 0; j < layer.codes.cols; ++j) {
      wi[j] = t * (static_cast<double>(layer.codes(i, j)) * layer.scales[j]);
    }
  }
  return w;
}

}  // namespace watersic
