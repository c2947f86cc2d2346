// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "watersic/errors.hpp"

namespace watersic {

/// Dense row-major matrix of 64-bit reals.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of `data` (row-major); validates size and finiteness.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

/// Square matrix with full storage. When built through `symmetric` the
/// entries are mirrored exactly on construction and the flag is set; the
/// `general` form stores arbitrary square data (used for cross-covariances).
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;

  static SymmetricMatrix symmetric(std::size_t dim, std::vector<double> data);
  static SymmetricMatrix general(std::size_t dim, std::vector<double> data);
  static SymmetricMatrix identity(std::size_t dim);
  static SymmetricMatrix zero(std::size_t dim);

  std::size_t dim() const { return dim_; }
  bool symmetry_enforced() const { return enforced_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

  const double* row(std::size_t i) const { return data_.data() + i * dim_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  std::vector<double> diagonal() const;

 private:
  std::size_t dim_ = 0;
  bool enforced_ = false;
  std::vector<double> data_;
};

/// Lower-triangular factor; entries above the diagonal are identically zero
/// and the diagonal is strictly positive when produced by `cholesky`.
class LowerTriangular {
 public:
  LowerTriangular() = default;
  explicit LowerTriangular(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}
  LowerTriangular(std::size_t dim, std::vector<double> data);

  std::size_t dim() const { return dim_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

  const double* row(std::size_t i) const { return data_.data() + i * dim_; }

  std::vector<double> diagonal() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Live/dead flags over feature indices; at least one live index.
class FeatureMask {
 public:
  FeatureMask() = default;
  explicit FeatureMask(std::vector<bool> live);
  static FeatureMask all_live(std::size_t dim);

  std::size_t dim() const { return live_.size(); }
  std::size_t live_count() const { return live_count_; }
  bool live(std::size_t i) const { return live_[i]; }
  bool any_dead() const { return live_count_ < live_.size(); }

  /// Indices of live features, ascending.
  std::vector<std::size_t> live_indices() const;

 private:
  std::vector<bool> live_;
  std::size_t live_count_ = 0;
};

enum class Axis { Rows, Cols };

// -- factorization and solves -----------------------------------------------

/// Left-looking Cholesky, H = L L^T. Throws NotPositiveDefinite when a pivot
/// is <= 0 or below 1e-14 x mean(diag(H)).
LowerTriangular cholesky(const SymmetricMatrix& h);

/// Solves X L^T = M by forward substitution, i.e. X = M (L^T)^{-1}.
DenseMatrix solve_upper_right(const DenseMatrix& m, const LowerTriangular& l);

// -- dead features -----------------------------------------------------------

/// live[i] is false iff diag[i] < tau * median(diag). Median of an
/// even-length diagonal is the mean of the two central order statistics.
FeatureMask detect_dead(const SymmetricMatrix& sigma_x, double tau);

DenseMatrix reduce(const DenseMatrix& m, const FeatureMask& mask, Axis axis);
DenseMatrix expand(const DenseMatrix& m, const FeatureMask& mask, Axis axis, double fill = 0.0);
/// Removes dead rows and columns jointly; preserves the symmetry flag.
SymmetricMatrix reduce_square(const SymmetricMatrix& m, const FeatureMask& mask);
std::vector<double> reduce(const std::vector<double>& v, const FeatureMask& mask);
std::vector<double> expand(const std::vector<double>& v, const FeatureMask& mask, double fill = 0.0);

// -- dense helpers -----------------------------------------------------------

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix multiply(const DenseMatrix& a, const SymmetricMatrix& s);
DenseMatrix multiply(const DenseMatrix& a, const LowerTriangular& l);
/// A^T A, exactly symmetric.
DenseMatrix gram(const DenseMatrix& a);
DenseMatrix to_dense(const LowerTriangular& l);
DenseMatrix to_dense(const SymmetricMatrix& s);

double median(std::vector<double> values);
double mean_diagonal(const SymmetricMatrix& m);

}  // namespace watersic
