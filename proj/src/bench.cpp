// SPDX-License-Identifier: Apache-2.0
#include "watersic/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "watersic/entropy_codec.hpp"
#include "watersic/ratectl.hpp"
#include "watersic/wtheory.hpp"

namespace watersic {

SymmetricMatrix random_covariance(std::size_t n, double cond, Rng& rng,
                                  std::vector<double>& eigenvalues_out) {
  if (n == 0) throw InvalidArgument("random_covariance: n must be >= 1");
  if (!(cond >= 1.0)) throw InvalidArgument("random_covariance: cond must be >= 1");
  eigenvalues_out.assign(n, 1.0);
  if (cond == 1.0 || n == 1) {
    return SymmetricMatrix::identity(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double expo =
        0.5 - static_cast<double>(i) / static_cast<double>(n - 1);
    eigenvalues_out[i] = std::pow(cond, expo);
  }
  // Q from modified Gram-Schmidt of a Gaussian matrix, diag(R) sign-fixed.
  DenseMatrix q(n, n);
  for (double& v : q.data()) v = rng.normal();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += q(i, k) * q(i, j);
      for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += q(i, j) * q(i, j);
    norm = std::sqrt(norm);
    double sign = q(j, j) < 0.0 ? -1.0 : 1.0;
    const double scale = sign / norm;
    for (std::size_t i = 0; i < n; ++i) q(i, j) *= scale;
  }
  std::vector<double> data(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += q(i, k) * eigenvalues_out[k] * q(j, k);
      data[i * n + j] = acc;
      data[j * n + i] = acc;
    }
  }
  return SymmetricMatrix::symmetric(n, std::move(data));
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double sigma, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = sigma * rng.normal();
  return m;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct Cell {
  std::uint64_t seed;
  double rate;
  SpacingMode mode;
};

BenchRecord run_cell(const BenchConfig& config, const Cell& cell) {
  Rng rng(cell.seed);
  std::vector<double> lambdas;
  const SymmetricMatrix sigma =
      random_covariance(config.cols, config.cond, rng, lambdas);
  const DenseMatrix w = gaussian_matrix(config.rows, config.cols, config.sigma_w, rng);
  const CovarianceSet covs = CovarianceSet::collapsed(sigma);

  QuantizeOptions opts;
  opts.delta = config.delta;
  opts.lmmse = config.lmmse;
  opts.rescaler = config.rescaler;
  opts.spacing = cell.mode;

  const LayerWorkspace ws = prepare_layer(w, covs, opts);
  RateSearchConfig search;
  search.target_rate = cell.rate;
  search.iterations = config.search_iterations;
  search.row_fraction = config.row_fraction;
  search.seed = cell.seed;
  search.spacing = cell.mode;
  search.lmmse = config.lmmse;
  search.metric = EntropyMetric::ColumnMean;
  const RateSearchResult found = search_scale(ws.w_red, ws.l_hat, ws.y_hat, search);

  const QuantizedLayer layer = quantize_prepared(ws, w, covs, found.scale_c, opts);

  BenchRecord rec;
  rec.seed = cell.seed;
  rec.n = config.cols;
  rec.a = config.rows;
  rec.spacing_mode = cell.mode == SpacingMode::WaterSic ? "watersic" : "uniform";
  rec.target_rate = cell.rate;
  rec.achieved_rate = column_entropy_mean(layer.codes);
  rec.empirical_distortion = layer.achieved_distortion;
  const Spectrum spectrum(lambdas, config.sigma_w * config.sigma_w);
  rec.waterfill_rate_at_d = waterfill_rate(spectrum, rec.empirical_distortion).rate;
  rec.predicted_gap = cell.mode == SpacingMode::WaterSic ? predicted_gap_watersic()
                                                         : predicted_gap_gptq(ws.l_hat);
  rec.measured_gap = rec.achieved_rate - rec.waterfill_rate_at_d;
  return rec;
}

}  // namespace

std::vector<BenchRecord> run_bench(const BenchConfig& config) {
  std::vector<SpacingMode> modes;
  if (config.spacing == "watersic") {
    modes = {SpacingMode::WaterSic};
  } else if (config.spacing == "uniform") {
    modes = {SpacingMode::Uniform};
  } else if (config.spacing == "both") {
    modes = {SpacingMode::WaterSic, SpacingMode::Uniform};
  } else {
    throw InvalidArgument("run_bench: spacing must be watersic, uniform or both");
  }
  if (config.rates.empty()) throw InvalidArgument("run_bench: no target rates");
  if (config.seeds < 1) throw InvalidArgument("run_bench: seeds must be >= 1");

  std::vector<Cell> cells;
  for (int s = 0; s < config.seeds; ++s) {
    for (double rate : config.rates) {
      for (SpacingMode mode : modes) {
        cells.push_back(Cell{static_cast<std::uint64_t>(s), rate, mode});
      }
    }
  }
  std::vector<BenchRecord> records(cells.size());
  parallel_for(cells.size(), config.threads,
               [&](std::size_t i) { records[i] = run_cell(config, cells[i]); });
  return records;
}

const char* const kBenchCsvHeader =
    "seed,n,a,spacing_mode,target_rate,achieved_rate,empirical_distortion,"
    "waterfill_rate_at_D,predicted_gap,measured_gap";

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kBenchCsvHeader << '\n';
  char buf[512];
  for (const BenchRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%llu,%zu,%zu,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  static_cast<unsigned long long>(r.seed), r.n, r.a, r.spacing_mode.c_str(),
                  r.target_rate, r.achieved_rate, r.empirical_distortion,
                  r.waterfill_rate_at_d, r.predicted_gap, r.measured_gap);
    out << buf;
  }
}

}  // namespace watersic
