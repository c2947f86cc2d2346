// SPDX-License-Identifier: Apache-2.0
#include "watersic/calib.hpp"

#include <cmath>

namespace watersic {

namespace {

bool is_zero(const SymmetricMatrix& m) {
  for (double v : m.data()) {
    if (v != 0.0) return false;
  }
  return true;
}

SymmetricMatrix blend(const SymmetricMatrix& a, const SymmetricMatrix& b, double w_b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("blend: dimension mismatch");
  std::vector<double> data(a.data().size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = (1.0 - w_b) * a.data()[i] + w_b * b.data()[i];
  }
  return a.symmetry_enforced() && b.symmetry_enforced()
             ? SymmetricMatrix::symmetric(a.dim(), std::move(data))
             : SymmetricMatrix::general(a.dim(), std::move(data));
}

void check_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

CovarianceSet CovarianceSet::collapsed(const SymmetricMatrix& sigma_x) {
  CovarianceSet set;
  set.sigma_x = sigma_x;
  set.sigma_xhat = sigma_x;
  set.sigma_x_xhat = SymmetricMatrix::general(sigma_x.dim(), sigma_x.data());
  set.sigma_delta_xhat = SymmetricMatrix::zero(sigma_x.dim());
  return set;
}

void CovarianceSet::validate() const {
  const std::size_t n = sigma_x.dim();
  if (sigma_xhat.dim() != n || sigma_x_xhat.dim() != n || sigma_delta_xhat.dim() != n)
    throw DimensionMismatch("CovarianceSet: matrices do not share a dimension");
}

CovarianceSet damp(const CovarianceSet& set, double delta) {
  if (delta < 0.0) throw InvalidArgument("damp: delta must be >= 0");
  set.validate();
  CovarianceSet out = set;
  const double add = delta * mean_diagonal(set.sigma_xhat);
  for (std::size_t i = 0; i < set.dim(); ++i) {
    out.sigma_x(i, i) += add;
    out.sigma_xhat(i, i) += add;
    out.sigma_x_xhat(i, i) += add;
  }
  return out;
}

DenseMatrix drift_combination(const DenseMatrix& w, const CovarianceSet& covs) {
  covs.validate();
  if (w.cols() != covs.dim()) throw DimensionMismatch("drift_combination: w.cols != n");
  DenseMatrix c = multiply(w, covs.sigma_x_xhat);
  if (is_zero(covs.sigma_delta_xhat)) return c;
  if (w.rows() != covs.dim())
    throw DimensionMismatch("drift_combination: residual term requires a square layer");
  for (std::size_t i = 0; i < c.rows(); ++i) {
    const double* d = covs.sigma_delta_xhat.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < c.cols(); ++j) ci[j] += d[j];
  }
  return c;
}

DenseMatrix drift_target(const DenseMatrix& w, const CovarianceSet& covs,
                         const LowerTriangular& l_hat) {
  if (l_hat.dim() != covs.dim()) throw DimensionMismatch("drift_target: l_hat.dim != n");
  return solve_upper_right(drift_combination(w, covs), l_hat);
}

CovarianceSet mix_drift(const CovarianceSet& covs, double eps_qr) {
  check_unit_interval(eps_qr, "eps_qr");
  covs.validate();
  CovarianceSet out = covs;
  out.sigma_xhat = blend(covs.sigma_xhat, covs.sigma_x, eps_qr);
  const SymmetricMatrix sigma_x_general =
      SymmetricMatrix::general(covs.sigma_x.dim(), covs.sigma_x.data());
  out.sigma_x_xhat = blend(covs.sigma_x_xhat, sigma_x_general, eps_qr);
  return out;
}

CovarianceSet mix_weighted(const CovarianceSet& weighted, const CovarianceSet& uniform,
                           double eps_aw) {
  check_unit_interval(eps_aw, "eps_aw");
  weighted.validate();
  uniform.validate();
  if (weighted.dim() != uniform.dim())
    throw DimensionMismatch("mix_weighted: sets differ in dimension");
  CovarianceSet out;
  out.sigma_x = blend(weighted.sigma_x, uniform.sigma_x, eps_aw);
  out.sigma_xhat = blend(weighted.sigma_xhat, uniform.sigma_xhat, eps_aw);
  out.sigma_x_xhat = blend(weighted.sigma_x_xhat, uniform.sigma_x_xhat, eps_aw);
  out.sigma_delta_xhat = blend(weighted.sigma_delta_xhat, uniform.sigma_delta_xhat, eps_aw);
  return out;
}

CovarianceSet apply_mixing(const CovarianceSet& weighted, const CovarianceSet& uniform,
                           const MixParams& params) {
  return mix_weighted(mix_drift(weighted, params.eps_qr), mix_drift(uniform, params.eps_qr),
                      params.eps_aw);
}

GoldenResult golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                                int iters) {
  if (!(lo < hi)) throw InvalidBracket("golden_section_min: lo >= hi");
  if (iters < 0) throw InvalidArgument("golden_section_min: negative iteration count");
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int k = 0; k < iters; ++k) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  const double x = 0.5 * (lo + hi);
  return GoldenResult{x, f(x), hi - lo};
}

namespace {

// (1/T) sum a_t b_t^T over a token range, pairwise to keep the reduction
// order independent of blocking.
void pairwise_outer(const DenseMatrix& a, const DenseMatrix& b, std::size_t begin,
                    std::size_t end, std::vector<double>& out) {
  const std::size_t n = a.cols();
  if (end - begin <= 8) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t t = begin; t < end; ++t) {
      const double* at = a.row(t);
      const double* bt = b.row(t);
      for (std::size_t i = 0; i < n; ++i) {
        const double v = at[i];
        if (v == 0.0) continue;
        double* oi = out.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) oi[j] += v * bt[j];
      }
    }
    return;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  std::vector<double> right(n * n);
  pairwise_outer(a, b, begin, mid, out);
  pairwise_outer(a, b, mid, end, right);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += right[i];
}

std::vector<double> second_moment(const DenseMatrix& a, const DenseMatrix& b) {
  const std::size_t n = a.cols();
  std::vector<double> acc(n * n);
  pairwise_outer(a, b, 0, a.rows(), acc);
  const double inv_t = 1.0 / static_cast<double>(a.rows());
  for (double& v : acc) v *= inv_t;
  return acc;
}

}  // namespace

CovarianceSet estimate_covariances(const DenseMatrix& x_samples, const DenseMatrix& xhat_samples,
                                   const DenseMatrix& r_delta_samples) {
  if (x_samples.rows() == 0) throw EmptySamples("estimate_covariances: no sample rows");
  const std::size_t t = x_samples.rows();
  const std::size_t n = x_samples.cols();
  if (xhat_samples.rows() != t || r_delta_samples.rows() != t ||
      xhat_samples.cols() != n || r_delta_samples.cols() != n)
    throw DimensionMismatch("estimate_covariances: sample matrices disagree in shape");
  CovarianceSet set;
  set.sigma_x = SymmetricMatrix::symmetric(n, second_moment(x_samples, x_samples));
  set.sigma_xhat = SymmetricMatrix::symmetric(n, second_moment(xhat_samples, xhat_samples));
  set.sigma_x_xhat = SymmetricMatrix::general(n, second_moment(x_samples, xhat_samples));
  set.sigma_delta_xhat =
      SymmetricMatrix::general(n, second_moment(r_delta_samples, xhat_samples));
  return set;
}

bool is_positive_semidefinite(const SymmetricMatrix& m, double damp_frac) {
  SymmetricMatrix probe = m;
  const double add = damp_frac * std::max(mean_diagonal(m), 1.0);
  for (std::size_t i = 0; i < m.dim(); ++i) probe(i, i) += add;
  try {
    cholesky(probe);
    return true;
  } catch (const NotPositiveDefinite&) {
    return false;
  }
}

}  // namespace watersic
