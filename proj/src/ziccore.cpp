// SPDX-License-Identifier: Apache-2.0
#include "watersic/ziccore.hpp"

#include <cmath>
#include <limits>

namespace watersic {

namespace {

double geometric_mean_diag(const LowerTriangular& l) {
  double log_sum = 0.0;
  for (std::size_t i = 0; i < l.dim(); ++i) {
    const double d = l(i, i);
    if (!(d > 0.0)) throw InvalidArgument("spacing: non-positive Cholesky diagonal");
    log_sum += std::log(d);
  }
  return std::exp(log_sum / static_cast<double>(l.dim()));
}

void check_spacing(const SpacingVector& spacing, std::size_t n) {
  if (spacing.alphas.size() != n) throw DimensionMismatch("spacing length != n");
  for (double a : spacing.alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("spacing: alpha must be positive");
  }
}

// Column loop shared by zsic and zsic_gains. Rows are independent within
// each column step, so the row loops may be split across threads by callers
// operating on disjoint row blocks.
void zsic_kernel(DenseMatrix& y, const LowerTriangular& l, const std::vector<double>& alphas,
                 bool lmmse, CodeMatrix& z, std::vector<double>& gains) {
  const std::size_t a = y.rows();
  const std::size_t n = y.cols();
  constexpr double kMaxCode = 2147483647.0;
  for (std::size_t i = n; i-- > 0;) {
    const double cell = alphas[i] * l(i, i);
    double f1 = 0.0, f2 = 0.0;
    for (std::size_t r = 0; r < a; ++r) {
      const double yv = y(r, i);
      const double zv = round_away(yv / cell);
      if (std::abs(zv) > kMaxCode) throw CodeOverflow("zsic: code exceeds 32-bit range");
      z.at(r, i) = static_cast<std::int32_t>(zv);
      f1 += zv * yv;
      f2 += zv * zv;
    }
    double gain = 1.0;
    if (lmmse) gain = f2 > 0.0 ? f1 / (cell * f2) : 0.0;
    gains[i] = gain;
    if (gain == 0.0) continue;
    const double* li = l.row(i);
    const double coef = gain * alphas[i];
    for (std::size_t r = 0; r < a; ++r) {
      const double zs = coef * static_cast<double>(z(r, i));
      if (zs == 0.0) continue;
      double* yr = y.row(r);
      for (std::size_t j = 0; j <= i; ++j) yr[j] -= zs * li[j];
    }
  }
}

ZsicResult run_zsic(const DenseMatrix& y, const LowerTriangular& l,
                    const SpacingVector& spacing, bool lmmse) {
  if (y.cols() != l.dim()) throw DimensionMismatch("zsic: y.cols != l.dim");
  check_spacing(spacing, y.cols());
  DenseMatrix work = y;  // Algorithm mutates Y; callers keep the original.
  ZsicResult out;
  out.codes = CodeMatrix(y.rows(), y.cols());
  out.gains.gammas.assign(y.cols(), 1.0);
  zsic_kernel(work, l, spacing.alphas, lmmse, out.codes, out.gains.gammas);
  return out;
}

}  // namespace

SpacingVector plain_watersic_spacing(const LowerTriangular& l, double alpha) {
  if (!(alpha > 0.0)) throw NonPositiveScale("plain_watersic_spacing: alpha must be > 0");
  return spacing_from_scale(l, alpha * geometric_mean_diag(l), SpacingMode::WaterSic);
}

SpacingVector uniform_spacing(const LowerTriangular& l, double alpha) {
  if (!(alpha > 0.0)) throw NonPositiveScale("uniform_spacing: alpha must be > 0");
  SpacingVector s;
  s.alphas.assign(l.dim(), alpha);
  s.scale_c = alpha * geometric_mean_diag(l);
  return s;
}

SpacingVector spacing_from_scale(const LowerTriangular& l, double c, SpacingMode mode) {
  if (!(c > 0.0)) throw NonPositiveScale("spacing_from_scale: c must be > 0");
  SpacingVector s;
  s.scale_c = c;
  s.alphas.resize(l.dim());
  if (mode == SpacingMode::WaterSic) {
    for (std::size_t i = 0; i < l.dim(); ++i) {
      const double d = l(i, i);
      if (!(d > 0.0)) throw InvalidArgument("spacing_from_scale: non-positive diagonal");
      s.alphas[i] = c / d;
    }
  } else {
    const double a = c / geometric_mean_diag(l);
    std::fill(s.alphas.begin(), s.alphas.end(), a);
  }
  return s;
}

CodeMatrix zsic(const DenseMatrix& y, const LowerTriangular& l, const SpacingVector& spacing) {
  return run_zsic(y, l, spacing, /*lmmse=*/false).codes;
}

ZsicResult zsic_gains(const DenseMatrix& y, const LowerTriangular& l,
                      const SpacingVector& spacing) {
  return run_zsic(y, l, spacing, /*lmmse=*/true);
}

ZsicResult zsic_lmmse(const DenseMatrix& y, const LowerTriangular& l, double scale_c) {
  if (!(scale_c > 0.0)) throw NonPositiveScale("zsic_lmmse: scale_c must be > 0");
  return run_zsic(y, l, spacing_from_scale(l, scale_c, SpacingMode::WaterSic), /*lmmse=*/true);
}

DenseMatrix reconstruct(const CodeMatrix& z, std::span<const double> alphas,
                        std::span<const double> gains, std::span<const double> row_gains) {
  if (alphas.size() != z.cols || gains.size() != z.cols || row_gains.size() != z.rows)
    throw DimensionMismatch("reconstruct: scale lengths do not match the code matrix");
  std::vector<double> col_scale(z.cols);
  for (std::size_t j = 0; j < z.cols; ++j) col_scale[j] = gains[j] * alphas[j];
  DenseMatrix w(z.rows, z.cols);
  for (std::size_t i = 0; i < z.rows; ++i) {
    const double t = row_gains[i];
    double* wi = w.row(i);
    for (std::size_t j = 0; j < z.cols; ++j) {
      wi[j] = t * (static_cast<double>(z(i, j)) * col_scale[j]);
    }
  }
  return w;
}

double layer_distortion(const DenseMatrix& w, const DenseMatrix& w_hat,
                        const SymmetricMatrix& sigma_x) {
  if (w.rows() != w_hat.rows() || w.cols() != w_hat.cols())
    throw DimensionMismatch("layer_distortion: shapes differ");
  if (w.cols() != sigma_x.dim())
    throw DimensionMismatch("layer_distortion: sigma dimension mismatch");
  DenseMatrix e(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.size(); ++i) e.data()[i] = w.data()[i] - w_hat.data()[i];
  DenseMatrix m = multiply(e, sigma_x);
  double acc = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) acc += e.data()[i] * m.data()[i];
  return acc / (static_cast<double>(w.rows()) * static_cast<double>(w.cols()));
}

}  // namespace watersic
