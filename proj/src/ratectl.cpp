// SPDX-License-Identifier: Apache-2.0
#include "watersic/ratectl.hpp"

#include <cmath>

#include "watersic/rng.hpp"

namespace watersic {

namespace {

void validate(const RateSearchConfig& cfg) {
  if (!(cfg.row_fraction > 0.0 && cfg.row_fraction <= 1.0))
    throw InvalidArgument("search_scale: row_fraction must lie in (0, 1]");
  if (cfg.iterations < 1) throw InvalidArgument("search_scale: iterations must be >= 1");
}

double rms(const DenseMatrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc += v * v;
  return std::sqrt(acc / static_cast<double>(m.size()));
}

double entropy_of_pass(const DenseMatrix& y, const LowerTriangular& l, double c,
                       const RateSearchConfig& cfg) {
  const SpacingVector spacing = spacing_from_scale(l, c, cfg.spacing);
  const CodeMatrix codes =
      cfg.lmmse ? zsic_gains(y, l, spacing).codes : zsic(y, l, spacing);
  return cfg.metric == EntropyMetric::Pooled
             ? entropy_bits(SymbolHistogram::from_codes(codes))
             : column_entropy_mean(codes);
}

DenseMatrix subsample_rows(const DenseMatrix& y, double fraction, std::uint64_t seed) {
  const std::size_t a = y.rows();
  const std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(a))));
  if (k >= a) return y;
  Rng rng(seed);
  const std::vector<std::size_t> rows = rng.sample_without_replacement(a, k);
  DenseMatrix out(rows.size(), y.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(y.row(rows[r]), y.row(rows[r]) + y.cols(), out.row(r));
  }
  return out;
}

}  // namespace

RateSearchResult search_scale(const DenseMatrix& w, const LowerTriangular& l_hat,
                              const DenseMatrix& y_hat, const RateSearchConfig& config) {
  validate(config);
  if (w.rows() != y_hat.rows() || y_hat.cols() != l_hat.dim() || w.cols() != l_hat.dim())
    throw DimensionMismatch("search_scale: inconsistent shapes");

  const bool auto_bracket = config.c_lo == 0.0 && config.c_hi == 0.0;
  double c_lo = config.c_lo, c_hi = config.c_hi;
  if (auto_bracket) {
    const double sigma = rms(y_hat);
    if (!(sigma > 0.0)) throw InvalidArgument("search_scale: y_hat is identically zero");
    c_lo = 1e-3 * sigma;
    c_hi = 64.0 * sigma;
  }
  if (!(c_lo > 0.0 && c_lo < c_hi)) throw InvalidBracket("search_scale: need 0 < c_lo < c_hi");

  const DenseMatrix sub = subsample_rows(y_hat, config.row_fraction, config.seed);
  auto eval = [&](double c) { return entropy_of_pass(sub, l_hat, c, config); };

  double h_lo = eval(c_lo);
  double h_hi = eval(c_hi);
  int widen = 0;
  while (!(h_lo >= config.target_rate && config.target_rate >= h_hi)) {
    if (!auto_bracket || widen >= 8)
      throw BracketMiss("search_scale: target entropy outside bracket");
    try {
      if (h_lo < config.target_rate) {
        c_lo /= 4.0;
        h_lo = eval(c_lo);
      } else {
        c_hi *= 4.0;
        h_hi = eval(c_hi);
      }
    } catch (const Error&) {
      // a widened edge that cannot even be evaluated cannot bracket the target
      throw BracketMiss("search_scale: bracket widening failed to reach the target");
    }
    ++widen;
  }

  double best_c = c_lo;
  double best_err = std::abs(h_lo - config.target_rate);
  auto consider = [&](double c, double h) {
    const double err = std::abs(h - config.target_rate);
    if (err < best_err) {
      best_err = err;
      best_c = c;
    }
  };
  consider(c_hi, h_hi);

  if (best_err > 0.0) {
    double lo = c_lo, hi = c_hi;
    for (int it = 0; it < config.iterations; ++it) {
      const double mid = std::sqrt(lo * hi);
      const double h = eval(mid);
      consider(mid, h);
      if (h > config.target_rate) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }

  RateSearchResult out;
  out.scale_c = best_c;
  out.achieved_entropy = entropy_of_pass(y_hat, l_hat, best_c, config);
  return out;
}

BudgetLedger::BudgetLedger(double global_rate, const std::vector<std::uint64_t>& layer_params) {
  if (layer_params.empty()) throw InvalidArgument("BudgetLedger: no layers");
  if (!(global_rate > 0.0)) throw InvalidArgument("BudgetLedger: global rate must be > 0");
  for (std::uint64_t p : layer_params) {
    if (p == 0) throw InvalidArgument("BudgetLedger: zero-parameter layer");
    remaining_params_ += p;
  }
  total_bits_ = global_rate * static_cast<double>(remaining_params_);
  remaining_bits_ = total_bits_;
  layers_remaining_ = layer_params.size();
}

double BudgetLedger::allocate(std::uint64_t layer_param_count) {
  if (layers_remaining_ == 0) throw InvalidArgument("BudgetLedger: no layers remaining");
  if (layer_param_count == 0 || layer_param_count > remaining_params_)
    throw InvalidArgument("BudgetLedger: bad layer parameter count");
  if (remaining_bits_ <= 0.0) throw ExhaustedBudget("BudgetLedger: no bits remaining");
  return remaining_bits_ / static_cast<double>(remaining_params_);
}

void BudgetLedger::record_spend(std::uint64_t layer_param_count, double bits_spent) {
  if (layers_remaining_ == 0) throw InvalidArgument("BudgetLedger: no layers remaining");
  if (layer_param_count == 0 || layer_param_count > remaining_params_)
    throw InvalidArgument("BudgetLedger: bad layer parameter count");
  log_.push_back(LedgerEntry{layer_param_count,
                             remaining_bits_ / static_cast<double>(remaining_params_),
                             bits_spent});
  remaining_bits_ -= bits_spent;
  remaining_params_ -= layer_param_count;
  --layers_remaining_;
}

}  // namespace watersic
