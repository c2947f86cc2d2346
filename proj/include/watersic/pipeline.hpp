// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "watersic/calib.hpp"
#include "watersic/matcore.hpp"
#include "watersic/ratectl.hpp"
#include "watersic/rescaler.hpp"
#include "watersic/ziccore.hpp"

namespace watersic {

struct QuantizeOptions {
  double delta = 1e-4;    // damping fraction
  double dead_tau = 1e-3; // dead-feature threshold
  bool lmmse = true;
  bool rescaler = true;
  SpacingMode spacing = SpacingMode::WaterSic;
  RescalerOptions rescaler_opts{};
};

/// Full output of one layer quantization. Vectors are full width; dead
/// columns carry zero codes and zero scales.
struct QuantizedLayer {
  CodeMatrix codes;
  std::vector<double> alphas;
  std::vector<double> gammas;
  std::vector<double> row_gains;
  FeatureMask mask;
  double scale_c = 0.0;
  double entropy = 0.0;         // pooled over live columns, bits/symbol
  double effective_rate = 0.0;  // entropy + 16/a + 16/n
  double achieved_distortion = 0.0;
};

/// Dead-feature reduction, damping, Cholesky and drift target for one
/// layer; shared between the rate search and the final quantization pass.
struct LayerWorkspace {
  FeatureMask mask;
  DenseMatrix w_red;
  CovarianceSet covs_damped;  // reduced, then damped
  LowerTriangular l_hat;
  DenseMatrix y_hat;
};

LayerWorkspace prepare_layer(const DenseMatrix& w, const CovarianceSet& covs,
                             const QuantizeOptions& opts);

QuantizedLayer quantize_prepared(const LayerWorkspace& ws, const DenseMatrix& w,
                                 const CovarianceSet& covs, double scale_c,
                                 const QuantizeOptions& opts);

/// Damping, dead-feature erasure, Cholesky, drift target, (LMMSE-)ZSIC,
/// rate computation and rescaler optimization, in that order, on the
/// reduced system; the result is expanded back to full width.
QuantizedLayer quantize_layer(const DenseMatrix& w, const CovarianceSet& covs, double scale_c,
                              const QuantizeOptions& opts);

/// T Z Gamma diag(alpha) at full width.
DenseMatrix reconstruct_layer(const QuantizedLayer& layer);

/// Actual coded plus side-information bits of a layer:
/// a * n_live * entropy + 16 * a + 16 * n_live.
double layer_bits_spent(const QuantizedLayer& layer);

struct ModelLayer {
  DenseMatrix w;
  CovarianceSet covs;
};

struct ModelQuantizeConfig {
  QuantizeOptions opts{};
  int search_iterations = 30;
  double row_fraction = 0.10;
  std::uint64_t seed = 0;
  EntropyMetric metric = EntropyMetric::Pooled;
};

/// Sequential whole-model pass with the running budget: each layer receives
/// the remaining budget divided by the remaining parameter count, rate is
/// matched by binary search over c, and actual bits spent are paid back to
/// the ledger.
std::vector<QuantizedLayer> quantize_model(const std::vector<ModelLayer>& layers,
                                           double global_rate,
                                           const ModelQuantizeConfig& config);

}  // namespace watersic
