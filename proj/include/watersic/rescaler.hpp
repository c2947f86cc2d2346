// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "watersic/calib.hpp"
#include "watersic/matcore.hpp"

namespace watersic {

/// Row gains t (||t||_1 normalized to a) and column gains gamma, plus the
/// objective values recorded after the initial point and after every
/// half-step.
struct RescalerPair {
  std::vector<double> t;
  std::vector<double> gamma;
  std::vector<double> loss_history;
};

struct RescalerOptions {
  double eps = 1e-6;
  int max_iters = 50;
  double ridge = -1.0;  // negative -> 1e-10 * mean(diag(sigma_xhat))
};

/// J(T, Gamma) = (1/an) tr(W Sigma_X W^T
///   - 2 (W Sigma_XXhat + Sigma_DeltaXhat)(T W0 Gamma)^T
///   + T W0 Gamma Sigma_Xhat Gamma W0^T T).
double rescaler_objective(const std::vector<double>& t, const std::vector<double>& gamma,
                          const DenseMatrix& w_hat0, const DenseMatrix& w,
                          const CovarianceSet& covs);

/// Exact minimizer of J over Gamma for fixed T (plus ridge):
/// gamma = (Sigma_Xhat o (W0^T diag(t^2) W0) + ridge I)^{-1} d.
std::vector<double> gamma_step(const std::vector<double>& t, const DenseMatrix& w_hat0,
                               const DenseMatrix& w, const CovarianceSet& covs, double ridge);

/// Separable per-row minimizer: t_i = p_i / (q_i + ridge).
std::vector<double> t_step(const std::vector<double>& gamma, const DenseMatrix& w_hat0,
                           const DenseMatrix& w, const CovarianceSet& covs, double ridge);

/// Alternating Gamma/T optimization from (1, gamma_init), renormalizing
/// ||t||_1 = a after each sweep; stops when the relative objective change
/// drops below opts.eps or max_iters sweeps elapse.
RescalerPair find_optimal_rescalers(const DenseMatrix& w_hat0, const DenseMatrix& w,
                                    const CovarianceSet& covs,
                                    const std::vector<double>& gamma_init,
                                    const RescalerOptions& opts = {});

}  // namespace watersic
