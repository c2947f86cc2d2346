// SPDX-License-Identifier: Apache-2.0
#include "watersic/rescaler.hpp"

#include <cmath>

namespace watersic {

namespace {

void check_shapes(const DenseMatrix& w_hat0, const DenseMatrix& w, const CovarianceSet& covs) {
  covs.validate();
  if (w.rows() != w_hat0.rows() || w.cols() != w_hat0.cols())
    throw DimensionMismatch("rescaler: w and w_hat0 differ in shape");
  if (w.cols() != covs.dim()) throw DimensionMismatch("rescaler: covariance dimension mismatch");
}

DenseMatrix scale_rows(const DenseMatrix& m, const std::vector<double>& s) {
  DenseMatrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* r = out.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) r[j] *= s[i];
  }
  return out;
}

DenseMatrix scale_cols(const DenseMatrix& m, const std::vector<double>& s) {
  DenseMatrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* r = out.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) r[j] *= s[j];
  }
  return out;
}

double dot_all(const DenseMatrix& a, const DenseMatrix& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i] * b.data()[i];
  return acc;
}

double default_ridge(const CovarianceSet& covs, double ridge) {
  return ridge < 0.0 ? 1e-10 * mean_diagonal(covs.sigma_xhat) : ridge;
}

// Solve (G + ridge I) x = d with G symmetric positive definite.
std::vector<double> solve_spd(DenseMatrix g, double ridge, const std::vector<double>& d) {
  const std::size_t n = g.rows();
  for (std::size_t i = 0; i < n; ++i) g(i, i) += ridge;
  LowerTriangular l;
  try {
    l = cholesky(SymmetricMatrix::symmetric(n, g.data()));
  } catch (const NotPositiveDefinite&) {
    throw SingularSystem("gamma_step: Hadamard system is not positive definite");
  }
  std::vector<double> y(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = d[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * y[k];
    y[i] = sum / l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double sum = y[i];
    for (std::size_t k = i + 1; k < n; ++k) sum -= l(k, i) * x[k];
    x[i] = sum / l(i, i);
  }
  return x;
}

}  // namespace

double rescaler_objective(const std::vector<double>& t, const std::vector<double>& gamma,
                          const DenseMatrix& w_hat0, const DenseMatrix& w,
                          const CovarianceSet& covs) {
  check_shapes(w_hat0, w, covs);
  if (t.size() != w.rows() || gamma.size() != w.cols())
    throw DimensionMismatch("rescaler_objective: gain lengths mismatch");
  const double an = static_cast<double>(w.rows()) * static_cast<double>(w.cols());
  const DenseMatrix what = scale_cols(scale_rows(w_hat0, t), gamma);
  const double term1 = dot_all(multiply(w, covs.sigma_x), w);
  const double term2 = dot_all(drift_combination(w, covs), what);
  const double term3 = dot_all(multiply(what, covs.sigma_xhat), what);
  return (term1 - 2.0 * term2 + term3) / an;
}

std::vector<double> gamma_step(const std::vector<double>& t, const DenseMatrix& w_hat0,
                               const DenseMatrix& w, const CovarianceSet& covs, double ridge) {
  check_shapes(w_hat0, w, covs);
  if (t.size() != w.rows()) throw DimensionMismatch("gamma_step: t length mismatch");
  const std::size_t n = w.cols();
  const DenseMatrix b = scale_rows(w_hat0, t);
  DenseMatrix g = gram(b);  // W0^T diag(t^2) W0
  for (std::size_t i = 0; i < n; ++i) {
    double* gi = g.row(i);
    const double* si = covs.sigma_xhat.row(i);
    for (std::size_t j = 0; j < n; ++j) gi[j] *= si[j];
  }
  const DenseMatrix c = drift_combination(w, covs);
  std::vector<double> d(n, 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double* br = b.row(r);
    const double* cr = c.row(r);
    for (std::size_t j = 0; j < n; ++j) d[j] += br[j] * cr[j];
  }
  return solve_spd(std::move(g), ridge, d);
}

std::vector<double> t_step(const std::vector<double>& gamma, const DenseMatrix& w_hat0,
                           const DenseMatrix& w, const CovarianceSet& covs, double ridge) {
  check_shapes(w_hat0, w, covs);
  if (gamma.size() != w.cols()) throw DimensionMismatch("t_step: gamma length mismatch");
  const DenseMatrix b = scale_cols(w_hat0, gamma);
  const DenseMatrix c = drift_combination(w, covs);
  const DenseMatrix m = multiply(b, covs.sigma_xhat);
  std::vector<double> t(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double p = 0.0, q = 0.0;
    const double* bi = b.row(i);
    const double* ci = c.row(i);
    const double* mi = m.row(i);
    for (std::size_t j = 0; j < w.cols(); ++j) {
      p += ci[j] * bi[j];
      q += mi[j] * bi[j];
    }
    const double denom = q + ridge;
    if (denom == 0.0) throw DegenerateRow("t_step: q_i + ridge == 0 at row " + std::to_string(i));
    t[i] = p / denom;
  }
  return t;
}

RescalerPair find_optimal_rescalers(const DenseMatrix& w_hat0, const DenseMatrix& w,
                                    const CovarianceSet& covs,
                                    const std::vector<double>& gamma_init,
                                    const RescalerOptions& opts) {
  check_shapes(w_hat0, w, covs);
  if (gamma_init.size() != w.cols())
    throw DimensionMismatch("find_optimal_rescalers: gamma_init length mismatch");
  const double ridge = default_ridge(covs, opts.ridge);
  const double a = static_cast<double>(w.rows());

  RescalerPair out;
  out.t.assign(w.rows(), 1.0);
  out.gamma = gamma_init;

  auto normalize = [&]() {
    double s = 0.0;
    for (double v : out.t) s += std::abs(v);
    s /= a;
    if (s > 0.0) {
      for (double& v : out.t) v /= s;
      for (double& v : out.gamma) v *= s;
    }
  };

  normalize();
  double loss_prev = rescaler_objective(out.t, out.gamma, w_hat0, w, covs);
  out.loss_history.push_back(loss_prev);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    out.gamma = gamma_step(out.t, w_hat0, w, covs, ridge);
    out.loss_history.push_back(rescaler_objective(out.t, out.gamma, w_hat0, w, covs));
    out.t = t_step(out.gamma, w_hat0, w, covs, ridge);
    normalize();
    const double loss_curr = rescaler_objective(out.t, out.gamma, w_hat0, w, covs);
    out.loss_history.push_back(loss_curr);
    if (std::abs(loss_curr - loss_prev) / (std::abs(loss_prev) + 1e-12) < opts.eps) break;
    loss_prev = loss_curr;
  }
  return out;
}

}  // namespace watersic
