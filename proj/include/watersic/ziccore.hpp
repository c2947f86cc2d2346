// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "watersic/matcore.hpp"

namespace watersic {

enum class SpacingMode { WaterSic, Uniform };

/// Per-column grid steps. scale_c is the geometric mean of alpha_i * l_ii,
/// i.e. the shared cell size c in WaterSIC mode.
struct SpacingVector {
  std::vector<double> alphas;
  double scale_c = 0.0;
};

/// Integer code matrix; entries of dead columns are zero.
struct CodeMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::int32_t> codes;

  CodeMatrix() = default;
  CodeMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), codes(r * c, 0) {}

  std::int32_t operator()(std::size_t i, std::size_t j) const { return codes[i * cols + j]; }
  std::int32_t& at(std::size_t i, std::size_t j) { return codes[i * cols + j]; }
};

struct GainVector {
  std::vector<double> gammas;
};

struct ZsicResult {
  CodeMatrix codes;
  GainVector gains;
};

/// alpha_i = alpha * |L|^{1/n} / l_ii; the product of the alphas equals
/// alpha^n (density preservation) and alpha_i * l_ii is constant across i.
SpacingVector plain_watersic_spacing(const LowerTriangular& l, double alpha);

/// The uniform-spacing baseline: alpha_i = alpha for all i.
SpacingVector uniform_spacing(const LowerTriangular& l, double alpha);

/// Spacing from the shared cell constant c: WaterSic -> alpha_i = c / l_ii,
/// Uniform -> alpha_i = c / gm(l_ii) (matched lattice density).
SpacingVector spacing_from_scale(const LowerTriangular& l, double c, SpacingMode mode);

/// Successive interference cancellation against L: columns are decided from
/// n down to 1, each decided column's contribution is subtracted from the
/// remaining ones. The input y is left untouched.
CodeMatrix zsic(const DenseMatrix& y, const LowerTriangular& l, const SpacingVector& spacing);

/// ZSIC with a per-column LMMSE gain: gamma_i = z^T y_col / (cell * |z|^2),
/// zero when the code column is all zero; the residual update uses the
/// gamma-corrected value.
ZsicResult zsic_gains(const DenseMatrix& y, const LowerTriangular& l,
                      const SpacingVector& spacing);

/// LMMSE variant with the WaterSIC spacing alpha_i = c / l_ii derived
/// internally from (c, L).
ZsicResult zsic_lmmse(const DenseMatrix& y, const LowerTriangular& l, double scale_c);

/// W_hat[i][j] = row_gains[i] * z[i][j] * gains[j] * alphas[j]; the
/// per-column product gains[j]*alphas[j] is fused before the row scaling.
DenseMatrix reconstruct(const CodeMatrix& z, std::span<const double> alphas,
                        std::span<const double> gains, std::span<const double> row_gains);

/// (1/na) tr((W - W_hat) Sigma_X (W - W_hat)^T).
double layer_distortion(const DenseMatrix& w, const DenseMatrix& w_hat,
                        const SymmetricMatrix& sigma_x);

/// round half away from zero, the tie rule used everywhere.
inline double round_away(double x) { return std::round(x); }

}  // namespace watersic
