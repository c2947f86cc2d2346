// SPDX-License-Identifier: Apache-2.0
#include "watersic/wtheory.hpp"

#include <algorithm>
#include <cmath>

namespace watersic {

namespace {

double log2_of(double x) { return std::log2(x); }

double distortion_at(const Spectrum& spec, double tau) {
  double acc = 0.0;
  for (double lam : spec.lambdas) acc += std::min(spec.sigma_w2 * lam, tau);
  return acc / static_cast<double>(spec.lambdas.size());
}

double rate_at(const Spectrum& spec, double tau) {
  double acc = 0.0;
  for (double lam : spec.lambdas) {
    const double ratio = spec.sigma_w2 * lam / tau;
    if (ratio > 1.0) acc += 0.5 * log2_of(ratio);
  }
  return acc / static_cast<double>(spec.lambdas.size());
}

double geometric_mean(const std::vector<double>& v) {
  double log_sum = 0.0;
  for (double x : v) log_sum += std::log(x);
  return std::exp(log_sum / static_cast<double>(v.size()));
}

}  // namespace

Spectrum::Spectrum(std::vector<double> lambdas_in, double sigma_w2_in)
    : lambdas(std::move(lambdas_in)), sigma_w2(sigma_w2_in) {
  if (lambdas.empty()) throw InvalidArgument("Spectrum: empty eigenvalue list");
  if (!(sigma_w2 > 0.0)) throw InvalidArgument("Spectrum: sigma_w2 must be > 0");
  for (double lam : lambdas) {
    if (!(lam > 0.0) || !std::isfinite(lam))
      throw InvalidArgument("Spectrum: eigenvalues must be positive and finite");
  }
  std::sort(lambdas.begin(), lambdas.end(), std::greater<double>());
}

double Spectrum::full_energy() const {
  double acc = 0.0;
  for (double lam : lambdas) acc += lam;
  return sigma_w2 * acc / static_cast<double>(lambdas.size());
}

double Spectrum::min_component() const { return sigma_w2 * lambdas.back(); }

WaterLevel waterfill_rate(const Spectrum& spec, double d) {
  const double full = spec.full_energy();
  if (!(d > 0.0) || d > full * (1.0 + 1e-15))
    throw DistortionOutOfRange("waterfill_rate: d outside (0, full energy]");
  double lo = spec.min_component() * 1e-9;
  double hi = spec.sigma_w2 * spec.lambdas.front();
  // D(tau) is non-decreasing; bisect to 1e-12 relative.
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (distortion_at(spec, mid) < d) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double tau = 0.5 * (lo + hi);
  WaterLevel out;
  out.tau = tau;
  out.distortion = distortion_at(spec, tau);
  out.rate = rate_at(spec, tau);
  return out;
}

double highrate_rate(const Spectrum& spec, double d) {
  if (!(d > 0.0) || !(d < spec.min_component()))
    throw PreconditionViolated("highrate_rate: requires 0 < d < sigma_w2 * min lambda");
  return 0.5 * log2_of(spec.sigma_w2 * geometric_mean(spec.lambdas) / d);
}

double predicted_gap_watersic() {
  return 0.5 * log2_of(2.0 * M_PI * M_E / 12.0);
}

double predicted_gap_gptq(const LowerTriangular& l) {
  const std::size_t n = l.dim();
  if (n == 0) throw InvalidArgument("predicted_gap_gptq: empty factor");
  double sum_sq = 0.0, log_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = l(i, i);
    if (!(d > 0.0)) throw InvalidArgument("predicted_gap_gptq: non-positive diagonal");
    sum_sq += d * d;
    log_sum += std::log(d * d);
  }
  const double am = sum_sq / static_cast<double>(n);
  const double gm = std::exp(log_sum / static_cast<double>(n));
  return predicted_gap_watersic() + 0.5 * log2_of(am / gm);
}

double zsic_distortion_prediction(const LowerTriangular& l, const SpacingVector& spacing) {
  if (spacing.alphas.size() != l.dim())
    throw DimensionMismatch("zsic_distortion_prediction: spacing length != l.dim");
  double acc = 0.0;
  for (std::size_t i = 0; i < l.dim(); ++i) {
    const double cell = spacing.alphas[i] * l(i, i);
    acc += cell * cell;
  }
  return acc / (12.0 * static_cast<double>(l.dim()));
}

Spectrum jacobi_spectrum(const SymmetricMatrix& m, double sigma_w2) {
  const std::size_t n = m.dim();
  if (n == 0) throw InvalidArgument("jacobi_spectrum: empty matrix");
  if (n > 2048) throw InvalidArgument("jacobi_spectrum: matrix too large for Jacobi sweeps");
  std::vector<double> a = m.data();
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  double norm = 0.0;
  for (double v : a) norm += v * v;
  norm = std::sqrt(norm);
  const double tol = 1e-14 * std::max(norm, 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
    }
    if (std::sqrt(2.0 * off) < tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) < tol / static_cast<double>(n)) continue;
        const double theta = 0.5 * std::atan2(2.0 * apq, at(q, q) - at(p, p));
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> lambdas(n);
  for (std::size_t i = 0; i < n; ++i) lambdas[i] = at(i, i);
  return Spectrum(std::move(lambdas), sigma_w2);
}

}  // namespace watersic
