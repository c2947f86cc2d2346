// SPDX-License-Identifier: Apache-2.0
#include "watersic/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace watersic {

namespace {

constexpr char kMagic[4] = {'W', 'S', 'M', 'X'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw TruncatedStream("WSMX: unexpected end of file");
  return v;
}

}  // namespace

void write_matrix(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint8_t>(out, 0);
  put<std::uint64_t>(out, m.rows());
  put<std::uint64_t>(out, m.cols());
  out.write(reinterpret_cast<const char*>(m.data().data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path);
}

DenseMatrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw BadMagic("WSMX: bad magic in " + path);
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw VersionMismatch("WSMX: unsupported version " + std::to_string(version));
  const auto dtype = get<std::uint8_t>(in);
  if (dtype != 0) throw InvalidArgument("WSMX: unsupported dtype tag");
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  std::vector<double> data(rows * cols);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!in) throw TruncatedStream("WSMX: payload shorter than rows*cols");
  return DenseMatrix(rows, cols, std::move(data));
}

SymmetricMatrix read_symmetric(const std::string& path) {
  DenseMatrix m = read_matrix(path);
  if (m.rows() != m.cols())
    throw DimensionMismatch("read_symmetric: matrix in " + path + " is not square");
  return SymmetricMatrix::symmetric(m.rows(), m.data());
}

}  // namespace watersic
