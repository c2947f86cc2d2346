// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "watersic/entropy_codec.hpp"
#include "watersic/matcore.hpp"
#include "watersic/ziccore.hpp"

namespace watersic {

enum class EntropyMetric { Pooled, ColumnMean };

struct RateSearchConfig {
  double target_rate = 4.0;  // bits per weight (entropy target)
  int iterations = 30;
  double row_fraction = 0.10;
  double c_lo = 0.0, c_hi = 0.0;  // both zero -> auto bracket from rms(y_hat)
  std::uint64_t seed = 0;
  SpacingMode spacing = SpacingMode::WaterSic;
  bool lmmse = false;
  EntropyMetric metric = EntropyMetric::Pooled;
};

struct RateSearchResult {
  double scale_c = 0.0;
  double achieved_entropy = 0.0;  // full-matrix entropy at scale_c
};

/// Binary search (in log c) for the scale whose subsampled-row entropy is
/// closest to config.target_rate, followed by a full-matrix pass at the
/// chosen scale. Entropy is non-increasing in c, so the bracket must
/// satisfy H(c_lo) >= target >= H(c_hi); auto-initialized brackets are
/// widened x4 up to 8 times before BracketMiss is raised, caller-provided
/// brackets raise it immediately.
RateSearchResult search_scale(const DenseMatrix& w, const LowerTriangular& l_hat,
                              const DenseMatrix& y_hat, const RateSearchConfig& config);

struct LedgerEntry {
  std::uint64_t params = 0;
  double target_rate = 0.0;
  double bits_spent = 0.0;
};

/// Running multi-layer bit budget: layers draw a per-parameter target from
/// the remaining budget and pay back what they actually spent, so
/// under-spending layers (dead features) free rate for later ones.
class BudgetLedger {
 public:
  BudgetLedger(double global_rate, const std::vector<std::uint64_t>& layer_params);

  /// remaining_bits / remaining_params; throws ExhaustedBudget when the
  /// budget is gone with layers still pending.
  double allocate(std::uint64_t layer_param_count);
  void record_spend(std::uint64_t layer_param_count, double bits_spent);

  double total_bits() const { return total_bits_; }
  double remaining_bits() const { return remaining_bits_; }
  std::uint64_t remaining_params() const { return remaining_params_; }
  std::size_t layers_remaining() const { return layers_remaining_; }
  const std::vector<LedgerEntry>& log() const { return log_; }

 private:
  double total_bits_ = 0.0;
  double remaining_bits_ = 0.0;
  std::uint64_t remaining_params_ = 0;
  std::size_t layers_remaining_ = 0;
  std::vector<LedgerEntry> log_;
};

}  // namespace watersic
