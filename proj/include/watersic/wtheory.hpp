// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "watersic/matcore.hpp"
#include "watersic/ziccore.hpp"

namespace watersic {

/// Eigenvalues of the activation covariance (descending, all positive) plus
/// the weight variance.
struct Spectrum {
  std::vector<double> lambdas;
  double sigma_w2 = 1.0;

  Spectrum() = default;
  Spectrum(std::vector<double> lambdas_in, double sigma_w2_in);

  double full_energy() const;  // (sigma_w2 / n) * sum lambda
  double min_component() const;
};

struct WaterLevel {
  double tau = 0.0;
  double rate = 0.0;        // bits per weight
  double distortion = 0.0;  // per-weight MSE
};

/// Reverse-waterfilling rate for target distortion d: bisects the water
/// level tau so that (1/n) sum min(sigma_w2 lambda_i, tau) = d, then
/// evaluates the rate (1/n) sum 0.5 log2 max(1, sigma_w2 lambda_i / tau).
WaterLevel waterfill_rate(const Spectrum& spec, double d);

/// 0.5 log2(sigma_w2 |Sigma|^{1/n} / d), valid for d < sigma_w2 min lambda.
double highrate_rate(const Spectrum& spec, double d);

/// 0.5 log2(2 pi e / 12), about 0.2546 bits.
double predicted_gap_watersic();

/// Adds the AM/GM excess of the squared Cholesky diagonal.
double predicted_gap_gptq(const LowerTriangular& l);

/// D_SIC = (1/n)(1/12) sum (alpha_i l_ii)^2.
double zsic_distortion_prediction(const LowerTriangular& l, const SpacingVector& spacing);

/// Eigenvalues by cyclic Jacobi rotations; intended for small n only.
Spectrum jacobi_spectrum(const SymmetricMatrix& m, double sigma_w2);

}  // namespace watersic
