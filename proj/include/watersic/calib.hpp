// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "watersic/matcore.hpp"

namespace watersic {

/// The four calibration matrices. sigma_x and sigma_xhat are symmetry
/// enforced; the two cross terms are general square matrices of the same
/// dimension.
struct CovarianceSet {
  SymmetricMatrix sigma_x;
  SymmetricMatrix sigma_xhat;
  SymmetricMatrix sigma_x_xhat;
  SymmetricMatrix sigma_delta_xhat;

  std::size_t dim() const { return sigma_x.dim(); }

  /// No drift statistics available: sigma_xhat = sigma_x_xhat = sigma_x,
  /// sigma_delta_xhat = 0.
  static CovarianceSet collapsed(const SymmetricMatrix& sigma_x);

  void validate() const;
};

struct MixParams {
  double eps_qr = 0.0;
  double eps_aw = 0.0;
};

/// Adds delta * mean(diag(sigma_xhat)) to the diagonals of sigma_x,
/// sigma_xhat and sigma_x_xhat; sigma_delta_xhat stays untouched.
CovarianceSet damp(const CovarianceSet& set, double delta);

/// W * sigma_x_xhat + sigma_delta_xhat. The residual term is stored n x n,
/// so it requires a square layer (w.rows == n) unless it is identically zero.
DenseMatrix drift_combination(const DenseMatrix& w, const CovarianceSet& covs);

/// y_hat = (W sigma_x_xhat + sigma_delta_xhat) (l_hat^T)^{-1}. Collapses to
/// W * l_hat when the set is collapsed.
DenseMatrix drift_target(const DenseMatrix& w, const CovarianceSet& covs,
                         const LowerTriangular& l_hat);

/// Convex blend of sigma_xhat and sigma_x_xhat toward sigma_x.
CovarianceSet mix_drift(const CovarianceSet& covs, double eps_qr);

/// Componentwise convex blend of two full sets.
CovarianceSet mix_weighted(const CovarianceSet& weighted, const CovarianceSet& uniform,
                           double eps_aw);

/// The two-stage blend: drift mixing at eps_qr applied to both sets, then
/// the weighted/uniform interpolation at eps_aw.
CovarianceSet apply_mixing(const CovarianceSet& weighted, const CovarianceSet& uniform,
                           const MixParams& params);

struct GoldenResult {
  double x = 0.0;
  double fx = 0.0;
  double bracket_width = 0.0;
};

/// Classic golden-section minimizer with cached interior evaluations; each
/// iteration performs one new evaluation and shrinks the bracket by
/// (sqrt(5)-1)/2. Returns the final bracket midpoint.
GoldenResult golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                                int iters);

/// Uncentered second moments from sample rows (tokens x n), pairwise-summed:
/// sigma_x = (1/T) sum x_t x_t^T and cross terms analogously.
CovarianceSet estimate_covariances(const DenseMatrix& x_samples, const DenseMatrix& xhat_samples,
                                   const DenseMatrix& r_delta_samples);

/// Cholesky probe with a tiny relative damping; used by tests.
bool is_positive_semidefinite(const SymmetricMatrix& m, double damp_frac = 1e-12);

}  // namespace watersic
