// SPDX-License-Identifier: Apache-2.0
#include "watersic/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace watersic {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw DimensionMismatch(what);
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, "DenseMatrix: data length != rows*cols");
  if (!all_finite()) throw InvalidArgument("DenseMatrix: non-finite entry");
}

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

SymmetricMatrix SymmetricMatrix::symmetric(std::size_t dim, std::vector<double> data) {
  require(data.size() == dim * dim, "SymmetricMatrix: data length != dim*dim");
  SymmetricMatrix m;
  m.dim_ = dim;
  m.enforced_ = true;
  m.data_ = std::move(data);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (m.data_[i * dim + j] + m.data_[j * dim + i]);
      m.data_[i * dim + j] = v;
      m.data_[j * dim + i] = v;
    }
  }
  return m;
}

SymmetricMatrix SymmetricMatrix::general(std::size_t dim, std::vector<double> data) {
  require(data.size() == dim * dim, "SymmetricMatrix: data length != dim*dim");
  SymmetricMatrix m;
  m.dim_ = dim;
  m.enforced_ = false;
  m.data_ = std::move(data);
  return m;
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t dim) {
  std::vector<double> data(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) data[i * dim + i] = 1.0;
  return symmetric(dim, std::move(data));
}

SymmetricMatrix SymmetricMatrix::zero(std::size_t dim) {
  return general(dim, std::vector<double>(dim * dim, 0.0));
}

std::vector<double> SymmetricMatrix::diagonal() const {
  std::vector<double> d(dim_);
  for (std::size_t i = 0; i < dim_; ++i) d[i] = data_[i * dim_ + i];
  return d;
}

LowerTriangular::LowerTriangular(std::size_t dim, std::vector<double> data)
    : dim_(dim), data_(std::move(data)) {
  require(data_.size() == dim_ * dim_, "LowerTriangular: data length != dim*dim");
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i + 1; j < dim_; ++j) {
      if (data_[i * dim_ + j] != 0.0)
        throw InvalidArgument("LowerTriangular: nonzero above diagonal");
    }
  }
}

std::vector<double> LowerTriangular::diagonal() const {
  std::vector<double> d(dim_);
  for (std::size_t i = 0; i < dim_; ++i) d[i] = data_[i * dim_ + i];
  return d;
}

FeatureMask::FeatureMask(std::vector<bool> live) : live_(std::move(live)) {
  live_count_ = static_cast<std::size_t>(std::count(live_.begin(), live_.end(), true));
  if (live_count_ == 0) throw AllDead("FeatureMask: no live features");
}

FeatureMask FeatureMask::all_live(std::size_t dim) {
  return FeatureMask(std::vector<bool>(dim, true));
}

std::vector<std::size_t> FeatureMask::live_indices() const {
  std::vector<std::size_t> idx;
  idx.reserve(live_count_);
  for (std::size_t i = 0; i < live_.size(); ++i) {
    if (live_[i]) idx.push_back(i);
  }
  return idx;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean_diagonal(const SymmetricMatrix& m) {
  if (m.dim() == 0) throw InvalidArgument("mean_diagonal: empty matrix");
  double s = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i) s += m(i, i);
  return s / static_cast<double>(m.dim());
}

LowerTriangular cholesky(const SymmetricMatrix& h) {
  const std::size_t n = h.dim();
  if (n == 0) throw InvalidArgument("cholesky: empty matrix");
  const double thresh = 1e-14 * mean_diagonal(h);
  LowerTriangular l(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = h(i, j);
      const double* li = l.row(i);
      const double* lj = l.row(j);
      for (std::size_t k = 0; k < j; ++k) sum -= li[k] * lj[k];
      if (i == j) {
        if (!(sum > 0.0) || sum < thresh)
          throw NotPositiveDefinite("cholesky: pivot " + std::to_string(i) +
                                    " is " + std::to_string(sum));
        l(i, i) = std::sqrt(sum);
      } else {
        l(i, j) = sum / l(j, j);
      }
    }
  }
  return l;
}

DenseMatrix solve_upper_right(const DenseMatrix& m, const LowerTriangular& l) {
  const std::size_t n = l.dim();
  require(m.cols() == n, "solve_upper_right: m.cols != l.dim");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(l(i, i) > 0.0)) throw InvalidArgument("solve_upper_right: non-positive diagonal");
  }
  DenseMatrix x(m.rows(), n);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* mr = m.row(r);
    double* xr = x.row(r);
    for (std::size_t j = 0; j < n; ++j) {
      double sum = mr[j];
      const double* lj = l.row(j);
      for (std::size_t k = 0; k < j; ++k) sum -= xr[k] * lj[k];
      xr[j] = sum / lj[j];
    }
  }
  return x;
}

FeatureMask detect_dead(const SymmetricMatrix& sigma_x, double tau) {
  const std::size_t n = sigma_x.dim();
  std::vector<double> diag = sigma_x.diagonal();
  const double med = median(diag);
  const double thresh = tau * med;
  std::vector<bool> live(n);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    live[i] = !(diag[i] < thresh);
    if (live[i]) ++count;
  }
  if (count == 0) throw AllDead("detect_dead: every dimension below threshold");
  return FeatureMask(std::move(live));
}

DenseMatrix reduce(const DenseMatrix& m, const FeatureMask& mask, Axis axis) {
  const auto idx = mask.live_indices();
  if (axis == Axis::Cols) {
    require(mask.dim() == m.cols(), "reduce: mask.dim != cols");
    DenseMatrix out(m.rows(), idx.size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const double* src = m.row(r);
      double* dst = out.row(r);
      for (std::size_t j = 0; j < idx.size(); ++j) dst[j] = src[idx[j]];
    }
    return out;
  }
  require(mask.dim() == m.rows(), "reduce: mask.dim != rows");
  DenseMatrix out(idx.size(), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy(m.row(idx[r]), m.row(idx[r]) + m.cols(), out.row(r));
  }
  return out;
}

DenseMatrix expand(const DenseMatrix& m, const FeatureMask& mask, Axis axis, double fill) {
  const auto idx = mask.live_indices();
  if (axis == Axis::Cols) {
    require(idx.size() == m.cols(), "expand: live count != cols");
    DenseMatrix out(m.rows(), mask.dim(), fill);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const double* src = m.row(r);
      double* dst = out.row(r);
      for (std::size_t j = 0; j < idx.size(); ++j) dst[idx[j]] = src[j];
    }
    return out;
  }
  require(idx.size() == m.rows(), "expand: live count != rows");
  DenseMatrix out(mask.dim(), m.cols(), fill);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy(m.row(r), m.row(r) + m.cols(), out.row(idx[r]));
  }
  return out;
}

SymmetricMatrix reduce_square(const SymmetricMatrix& m, const FeatureMask& mask) {
  require(mask.dim() == m.dim(), "reduce_square: mask.dim != dim");
  const auto idx = mask.live_indices();
  const std::size_t k = idx.size();
  std::vector<double> data(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    const double* src = m.row(idx[i]);
    for (std::size_t j = 0; j < k; ++j) data[i * k + j] = src[idx[j]];
  }
  return m.symmetry_enforced() ? SymmetricMatrix::symmetric(k, std::move(data))
                               : SymmetricMatrix::general(k, std::move(data));
}

std::vector<double> reduce(const std::vector<double>& v, const FeatureMask& mask) {
  require(mask.dim() == v.size(), "reduce: mask.dim != length");
  std::vector<double> out;
  out.reserve(mask.live_count());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask.live(i)) out.push_back(v[i]);
  }
  return out;
}

std::vector<double> expand(const std::vector<double>& v, const FeatureMask& mask, double fill) {
  require(mask.live_count() == v.size(), "expand: live count != length");
  std::vector<double> out(mask.dim(), fill);
  std::size_t k = 0;
  for (std::size_t i = 0; i < mask.dim(); ++i) {
    if (mask.live(i)) out[i] = v[k++];
  }
  return out;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "multiply: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = ai[k];
      if (v == 0.0) continue;
      const double* bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += v * bk[j];
    }
  }
  return c;
}

DenseMatrix multiply(const DenseMatrix& a, const SymmetricMatrix& s) {
  require(a.cols() == s.dim(), "multiply: inner dimensions differ");
  DenseMatrix c(a.rows(), s.dim());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = ai[k];
      if (v == 0.0) continue;
      const double* sk = s.row(k);
      for (std::size_t j = 0; j < s.dim(); ++j) ci[j] += v * sk[j];
    }
  }
  return c;
}

DenseMatrix multiply(const DenseMatrix& a, const LowerTriangular& l) {
  require(a.cols() == l.dim(), "multiply: inner dimensions differ");
  DenseMatrix c(a.rows(), l.dim());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = ai[k];
      if (v == 0.0) continue;
      const double* lk = l.row(k);
      for (std::size_t j = 0; j <= k; ++j) ci[j] += v * lk[j];
    }
  }
  return c;
}

DenseMatrix gram(const DenseMatrix& a) {
  const std::size_t n = a.cols();
  DenseMatrix g(n, n);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* ar = a.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = ar[i];
      if (v == 0.0) continue;
      double* gi = g.row(i);
      for (std::size_t j = i; j < n; ++j) gi[j] += v * ar[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  }
  return g;
}

DenseMatrix to_dense(const LowerTriangular& l) {
  DenseMatrix m(l.dim(), l.dim());
  for (std::size_t i = 0; i < l.dim(); ++i) {
    std::copy(l.row(i), l.row(i) + l.dim(), m.row(i));
  }
  return m;
}

DenseMatrix to_dense(const SymmetricMatrix& s) {
  DenseMatrix m(s.dim(), s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    std::copy(s.row(i), s.row(i) + s.dim(), m.row(i));
  }
  return m;
}

}  // namespace watersic
