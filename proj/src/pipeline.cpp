// SPDX-License-Identifier: Apache-2.0
#include "watersic/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "watersic/entropy_codec.hpp"

namespace watersic {

LayerWorkspace prepare_layer(const DenseMatrix& w, const CovarianceSet& covs,
                             const QuantizeOptions& opts) {
  covs.validate();
  if (w.cols() != covs.dim()) throw DimensionMismatch("quantize_layer: w.cols != covs.dim");
  LayerWorkspace ws;
  ws.mask = detect_dead(covs.sigma_x, opts.dead_tau);
  ws.w_red = ws.mask.any_dead() ? reduce(w, ws.mask, Axis::Cols) : w;
  CovarianceSet reduced;
  if (ws.mask.any_dead()) {
    reduced.sigma_x = reduce_square(covs.sigma_x, ws.mask);
    reduced.sigma_xhat = reduce_square(covs.sigma_xhat, ws.mask);
    reduced.sigma_x_xhat = reduce_square(covs.sigma_x_xhat, ws.mask);
    reduced.sigma_delta_xhat = reduce_square(covs.sigma_delta_xhat, ws.mask);
  } else {
    reduced = covs;
  }
  ws.covs_damped = damp(reduced, opts.delta);
  ws.l_hat = cholesky(ws.covs_damped.sigma_xhat);
  ws.y_hat = drift_target(ws.w_red, ws.covs_damped, ws.l_hat);
  return ws;
}

QuantizedLayer quantize_prepared(const LayerWorkspace& ws, const DenseMatrix& w,
                                 const CovarianceSet& covs, double scale_c,
                                 const QuantizeOptions& opts) {
  if (!(scale_c > 0.0)) throw NonPositiveScale("quantize_layer: scale_c must be > 0");
  const std::size_t a = w.rows();
  const std::size_t n = w.cols();

  const SpacingVector spacing = spacing_from_scale(ws.l_hat, scale_c, opts.spacing);
  CodeMatrix codes_red;
  std::vector<double> gains_red;
  if (opts.lmmse) {
    ZsicResult res = zsic_gains(ws.y_hat, ws.l_hat, spacing);
    codes_red = std::move(res.codes);
    gains_red = std::move(res.gains.gammas);
  } else {
    codes_red = zsic(ws.y_hat, ws.l_hat, spacing);
    gains_red.assign(spacing.alphas.size(), 1.0);
  }

  const double entropy = entropy_bits(SymbolHistogram::from_codes(codes_red));

  std::vector<double> t(a, 1.0);
  std::vector<double> gamma = gains_red;
  if (opts.rescaler) {
    // Phase 4 starts from W0 = Z diag(alpha) with gamma_init = LMMSE gains.
    DenseMatrix w_hat0(codes_red.rows, codes_red.cols);
    for (std::size_t i = 0; i < codes_red.rows; ++i) {
      double* row = w_hat0.row(i);
      for (std::size_t j = 0; j < codes_red.cols; ++j) {
        row[j] = static_cast<double>(codes_red(i, j)) * spacing.alphas[j];
      }
    }
    RescalerPair pair =
        find_optimal_rescalers(w_hat0, ws.w_red, ws.covs_damped, gains_red, opts.rescaler_opts);
    t = std::move(pair.t);
    gamma = std::move(pair.gamma);
  }

  QuantizedLayer layer;
  layer.mask = ws.mask;
  layer.scale_c = scale_c;
  layer.entropy = entropy;
  layer.effective_rate = effective_rate(entropy, a, n);
  layer.row_gains = std::move(t);
  if (ws.mask.any_dead()) {
    layer.alphas = expand(spacing.alphas, ws.mask, 0.0);
    layer.gammas = expand(gamma, ws.mask, 0.0);
    layer.codes = CodeMatrix(a, n);
    const auto idx = ws.mask.live_indices();
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = 0; j < idx.size(); ++j) {
        layer.codes.at(i, idx[j]) = codes_red(i, j);
      }
    }
  } else {
    layer.alphas = spacing.alphas;
    layer.gammas = std::move(gamma);
    layer.codes = std::move(codes_red);
  }
  layer.achieved_distortion = layer_distortion(w, reconstruct_layer(layer), covs.sigma_x);
  return layer;
}

QuantizedLayer quantize_layer(const DenseMatrix& w, const CovarianceSet& covs, double scale_c,
                              const QuantizeOptions& opts) {
  const LayerWorkspace ws = prepare_layer(w, covs, opts);
  return quantize_prepared(ws, w, covs, scale_c, opts);
}

DenseMatrix reconstruct_layer(const QuantizedLayer& layer) {
  return reconstruct(layer.codes, layer.alphas, layer.gammas, layer.row_gains);
}

double layer_bits_spent(const QuantizedLayer& layer) {
  const double a = static_cast<double>(layer.codes.rows);
  const double live = static_cast<double>(layer.mask.live_count());
  return a * live * layer.entropy + 16.0 * a + 16.0 * live;
}

std::vector<QuantizedLayer> quantize_model(const std::vector<ModelLayer>& layers,
                                           double global_rate,
                                           const ModelQuantizeConfig& config) {
  if (layers.empty()) throw InvalidArgument("quantize_model: empty layer list");
  std::vector<std::uint64_t> params;
  params.reserve(layers.size());
  for (const ModelLayer& layer : layers) {
    params.push_back(static_cast<std::uint64_t>(layer.w.rows()) * layer.w.cols());
  }
  BudgetLedger ledger(global_rate, params);

  std::vector<QuantizedLayer> out;
  out.reserve(layers.size());
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const ModelLayer& layer = layers[li];
    const std::size_t a = layer.w.rows();
    const std::size_t n = layer.w.cols();
    const double target_eff = ledger.allocate(params[li]);
    const double overhead = 16.0 / static_cast<double>(a) + 16.0 / static_cast<double>(n);
    const double entropy_target = std::max(target_eff - overhead, 0.01);

    const LayerWorkspace ws = prepare_layer(layer.w, layer.covs, config.opts);
    RateSearchConfig search;
    search.target_rate = entropy_target;
    search.iterations = config.search_iterations;
    search.row_fraction = config.row_fraction;
    search.seed = config.seed + li;
    search.spacing = config.opts.spacing;
    search.lmmse = config.opts.lmmse;
    search.metric = config.metric;
    const RateSearchResult found = search_scale(ws.w_red, ws.l_hat, ws.y_hat, search);

    QuantizedLayer q = quantize_prepared(ws, layer.w, layer.covs, found.scale_c, config.opts);
    ledger.record_spend(params[li], layer_bits_spent(q));
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace watersic
