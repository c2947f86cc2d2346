// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "watersic/matcore.hpp"
#include "watersic/pipeline.hpp"
#include "watersic/rng.hpp"

namespace watersic {

/// Synthetic covariance Q diag(lambda) Q^T with log-equispaced eigenvalues
/// spanning `cond` at unit geometric mean; Q comes from the QR of a Gaussian
/// matrix with a sign-fixed R diagonal. cond == 1 yields the exact identity.
SymmetricMatrix random_covariance(std::size_t n, double cond, Rng& rng,
                                  std::vector<double>& eigenvalues_out);

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double sigma, Rng& rng);

/// Runs fn(0..count-1) on a small worker pool; rethrows the first failure.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

struct BenchConfig {
  std::size_t rows = 8192;
  std::size_t cols = 128;
  std::vector<double> rates{4.0};
  double cond = 1e3;
  int seeds = 10;
  std::string spacing = "watersic";  // watersic | uniform | both
  bool lmmse = false;
  bool rescaler = false;
  double sigma_w = 1.0;
  double delta = 0.0;
  int threads = 0;  // 0 -> hardware concurrency
  int search_iterations = 30;
  double row_fraction = 0.10;
};

/// One rate-distortion measurement. achieved_rate is the mean per-column
/// entropy of the final codes (the rate notion of the per-column coding
/// scheme the asymptotic gap statements are about); measured_gap is
/// achieved_rate minus the waterfilling rate at the empirical distortion.
struct BenchRecord {
  std::uint64_t seed = 0;
  std::size_t n = 0, a = 0;
  std::string spacing_mode;
  double target_rate = 0.0;
  double achieved_rate = 0.0;
  double empirical_distortion = 0.0;
  double waterfill_rate_at_d = 0.0;
  double predicted_gap = 0.0;
  double measured_gap = 0.0;
};

std::vector<BenchRecord> run_bench(const BenchConfig& config);

extern const char* const kBenchCsvHeader;
void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);

}  // namespace watersic
