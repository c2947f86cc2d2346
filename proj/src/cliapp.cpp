// SPDX-License-Identifier: Apache-2.0
#include "watersic/cliapp.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "watersic/bench.hpp"
#include "watersic/calib.hpp"
#include "watersic/container.hpp"
#include "watersic/entropy_codec.hpp"
#include "watersic/io.hpp"
#include "watersic/pipeline.hpp"
#include "watersic/ratectl.hpp"
#include "watersic/rescaler.hpp"
#include "watersic/rng.hpp"
#include "watersic/wtheory.hpp"

namespace watersic {

namespace {

using nlohmann::ordered_json;

SpacingMode parse_spacing(const std::string& s) {
  if (s == "watersic") return SpacingMode::WaterSic;
  if (s == "uniform") return SpacingMode::Uniform;
  throw InvalidArgument("spacing must be watersic or uniform");
}

bool parse_on_off(const std::string& s, const char* flag) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw InvalidArgument(std::string(flag) + " must be on or off");
}

int cmd_bench_rd(const BenchConfig& config, const std::string& csv_path) {
  const std::vector<BenchRecord> records = run_bench(config);
  if (csv_path.empty()) {
    write_csv(std::cout, records);
  } else {
    std::ofstream out(csv_path);
    if (!out) throw IoError("cannot open for writing: " + csv_path);
    write_csv(out, records);
  }
  return 0;
}

struct QuantizeArgs {
  std::string weights_path, sigma_path, sigma_xhat_path, sigma_cross_path, sigma_delta_path;
  std::string out_path;
  double rate = 0.0;     // > 0 -> rate search
  double scale_c = 0.0;  // used when rate == 0
  double delta = 1e-4;
  double tau = 1e-3;
  std::string spacing = "watersic";
  std::string lmmse = "on";
  std::string rescaler = "on";
  int iterations = 30;
  double row_fraction = 0.10;
  std::uint64_t seed = 0;
};

int cmd_quantize(const QuantizeArgs& args) {
  const DenseMatrix w = read_matrix(args.weights_path);
  const SymmetricMatrix sigma = read_symmetric(args.sigma_path);
  CovarianceSet covs = CovarianceSet::collapsed(sigma);
  if (!args.sigma_xhat_path.empty()) covs.sigma_xhat = read_symmetric(args.sigma_xhat_path);
  if (!args.sigma_cross_path.empty()) {
    const DenseMatrix m = read_matrix(args.sigma_cross_path);
    covs.sigma_x_xhat = SymmetricMatrix::general(m.rows(), m.data());
  }
  if (!args.sigma_delta_path.empty()) {
    const DenseMatrix m = read_matrix(args.sigma_delta_path);
    covs.sigma_delta_xhat = SymmetricMatrix::general(m.rows(), m.data());
  }

  QuantizeOptions opts;
  opts.delta = args.delta;
  opts.dead_tau = args.tau;
  opts.spacing = parse_spacing(args.spacing);
  opts.lmmse = parse_on_off(args.lmmse, "--lmmse");
  opts.rescaler = parse_on_off(args.rescaler, "--rescaler");

  const LayerWorkspace ws = prepare_layer(w, covs, opts);
  double scale_c = args.scale_c;
  if (args.rate > 0.0) {
    RateSearchConfig search;
    const double overhead =
        16.0 / static_cast<double>(w.rows()) + 16.0 / static_cast<double>(w.cols());
    search.target_rate = std::max(args.rate - overhead, 0.01);
    search.iterations = args.iterations;
    search.row_fraction = args.row_fraction;
    search.seed = args.seed;
    search.spacing = opts.spacing;
    search.lmmse = opts.lmmse;
    scale_c = search_scale(ws.w_red, ws.l_hat, ws.y_hat, search).scale_c;
  }
  if (!(scale_c > 0.0)) throw InvalidArgument("quantize: provide --rate or a positive --scale-c");

  const QuantizedLayer layer = quantize_prepared(ws, w, covs, scale_c, opts);
  const std::vector<std::uint8_t> bytes = encode_container(layer);
  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + args.out_path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + args.out_path);

  ordered_json stats;
  stats["rate"] = layer.effective_rate;
  stats["entropy"] = layer.entropy;
  stats["distortion"] = layer.achieved_distortion;
  if (w.cols() <= 1024) {
    const Spectrum spec = jacobi_spectrum(sigma, 1.0);
    stats["gap_bits"] = layer.entropy - waterfill_rate(spec, layer.achieved_distortion).rate;
  } else {
    stats["gap_bits"] = nullptr;
  }
  stats["dead_features"] = layer.mask.dim() - layer.mask.live_count();
  std::cout << stats.dump() << '\n';
  return 0;
}

int cmd_dequantize(const std::string& container_path, const std::string& out_path) {
  std::ifstream in(container_path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + container_path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  write_matrix(out_path, dequantize(bytes));
  return 0;
}

int cmd_waterfill(const std::string& lambdas_csv, double distortion, double sigma_w) {
  std::vector<double> lambdas;
  std::stringstream ss(lambdas_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) lambdas.push_back(std::stod(item));
  }
  const Spectrum spec(lambdas, sigma_w * sigma_w);
  const WaterLevel level = waterfill_rate(spec, distortion);
  ordered_json out;
  out["rate"] = level.rate;
  out["distortion"] = level.distortion;
  out["tau"] = level.tau;
  std::cout << out.dump() << '\n';
  return 0;
}

}  // namespace

int run_selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    out << (ok ? "[PASS] " : "[FAIL] ") << name << '\n';
    if (!ok) ++failures;
  };

  {  // fundamental cell bound
    Rng rng(7);
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
      const std::size_t n = 2 + static_cast<std::size_t>(rng.next_u64() % 7);
      LowerTriangular l(n);
      SpacingVector spacing;
      spacing.alphas.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) l(i, j) = rng.normal();
        l(i, i) = rng.uniform(0.5, 2.0);
        spacing.alphas[i] = rng.uniform(0.5, 2.0);
      }
      DenseMatrix y(1, n);
      for (double& v : y.data()) v = 3.0 * rng.normal();
      const CodeMatrix z = zsic(y, l, spacing);
      DenseMatrix residual = y;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
          residual(0, i) -= static_cast<double>(z(0, k)) * spacing.alphas[k] * l(k, i);
        }
      }
      for (std::size_t i = 0; i < n && ok; ++i) {
        const double half = 0.5 * spacing.alphas[i] * l(i, i);
        ok = residual(0, i) >= -half && residual(0, i) < half;
      }
    }
    check("zsic residual stays in the fundamental cell", ok);
  }

  {  // shift covariance
    Rng rng(8);
    bool ok = true;
    for (int trial = 0; trial < 100 && ok; ++trial) {
      const std::size_t n = 4;
      LowerTriangular l(n);
      SpacingVector spacing;
      spacing.alphas.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) l(i, j) = rng.normal();
        l(i, i) = rng.uniform(0.5, 2.0);
        spacing.alphas[i] = rng.uniform(0.5, 2.0);
      }
      DenseMatrix y(1, n);
      for (double& v : y.data()) v = 2.0 * rng.normal();
      std::vector<int> shift(n);
      for (int& s : shift) s = static_cast<int>(rng.next_u64() % 11) - 5;
      DenseMatrix shifted = y;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
          shifted(0, i) += static_cast<double>(shift[k]) * spacing.alphas[k] * l(k, i);
        }
      }
      const CodeMatrix z0 = zsic(y, l, spacing);
      const CodeMatrix z1 = zsic(shifted, l, spacing);
      for (std::size_t k = 0; k < n && ok; ++k) ok = z1(0, k) == z0(0, k) + shift[k];
    }
    check("zsic shift covariance", ok);
  }

  {  // waterfilling vs high-rate formula
    Rng rng(9);
    bool ok = true;
    for (int trial = 0; trial < 25 && ok; ++trial) {
      std::vector<double> lambdas(6);
      for (double& v : lambdas) v = std::exp(rng.uniform(-2.0, 2.0));
      const Spectrum spec(lambdas, 1.0);
      const double d = spec.min_component() * rng.uniform(0.05, 0.9);
      ok = std::abs(waterfill_rate(spec, d).rate - highrate_rate(spec, d)) < 1e-10;
    }
    check("waterfilling matches the high-rate formula", ok);
  }

  {  // huffman round trip
    Rng rng(10);
    bool ok = true;
    for (int trial = 0; trial < 10 && ok; ++trial) {
      CodeMatrix z(16, 16);
      for (auto& v : z.codes) {
        v = static_cast<std::int32_t>(std::llround(4.0 * rng.normal()));
      }
      const SymbolHistogram hist = SymbolHistogram::from_codes(z);
      const HuffmanTable table = HuffmanTable::build(hist);
      const CodeMatrix back = table.decode(table.encode(z), z.rows, z.cols);
      ok = back.codes == z.codes;
    }
    check("huffman round trip", ok);
  }

  {  // rescaler monotonicity
    Rng rng(11);
    bool ok = true;
    for (int trial = 0; trial < 5 && ok; ++trial) {
      const std::size_t dim = 8;
      std::vector<double> data(dim * dim);
      DenseMatrix g(dim, dim);
      for (double& v : g.data()) v = rng.normal();
      const DenseMatrix gg = gram(g);
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) data[i * dim + j] = gg(i, j) + (i == j ? 0.5 : 0.0);
      }
      const CovarianceSet covs =
          CovarianceSet::collapsed(SymmetricMatrix::symmetric(dim, data));
      DenseMatrix w(dim, dim), w0(dim, dim);
      for (double& v : w.data()) v = rng.normal();
      for (std::size_t i = 0; i < w.size(); ++i) w0.data()[i] = w.data()[i] + 0.2 * rng.normal();
      const RescalerPair pair =
          find_optimal_rescalers(w0, w, covs, std::vector<double>(dim, 1.0));
      for (std::size_t k = 1; k < pair.loss_history.size() && ok; ++k) {
        ok = pair.loss_history[k] <=
             pair.loss_history[k - 1] + 1e-10 * (1.0 + std::abs(pair.loss_history[k - 1]));
      }
    }
    check("rescaler loss non-increasing", ok);
  }

  {  // container round trip
    Rng rng(12);
    bool ok = true;
    for (int trial = 0; trial < 5 && ok; ++trial) {
      QuantizedLayer layer;
      const std::size_t a = 12, n = 9;
      layer.codes = CodeMatrix(a, n);
      for (auto& v : layer.codes.codes) {
        v = static_cast<std::int32_t>(std::llround(3.0 * rng.normal()));
      }
      layer.alphas.assign(n, 0.5);
      layer.gammas.assign(n, 1.0);
      layer.row_gains.assign(a, 1.0);
      layer.mask = FeatureMask::all_live(n);
      const std::vector<std::uint8_t> bytes = encode_container(layer);
      const DecodedLayer decoded = decode_container(bytes);
      ok = decoded.codes.codes == layer.codes.codes;
    }
    check("container round trip", ok);
  }

  out << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"WaterSIC linear-layer quantization toolkit"};
  app.require_subcommand(1);

  // bench-rd
  auto* bench = app.add_subcommand("bench-rd", "synthetic rate-distortion benchmark");
  BenchConfig bench_config;
  bench_config.rates.clear();
  std::string bench_csv;
  std::string bench_lmmse = "off", bench_rescaler = "off";
  bench->add_option("-a,--rows", bench_config.rows, "weight matrix rows");
  bench->add_option("-n,--cols", bench_config.cols, "weight matrix columns");
  bench->add_option("--rate", bench_config.rates, "target rate in bits/weight (repeatable)")
      ->required();
  bench->add_option("--cond", bench_config.cond, "covariance condition number");
  bench->add_option("--seeds", bench_config.seeds, "number of seeds (0..seeds-1)");
  bench->add_option("--spacing", bench_config.spacing, "watersic | uniform | both");
  bench->add_option("--lmmse", bench_lmmse, "on | off");
  bench->add_option("--rescaler", bench_rescaler, "on | off");
  bench->add_option("--csv", bench_csv, "output CSV path (default stdout)");
  bench->add_option("--sigma-w", bench_config.sigma_w, "weight standard deviation");
  bench->add_option("--threads", bench_config.threads, "worker threads (0 = hardware)");
  bench->add_option("--search-iters", bench_config.search_iterations, "binary search iterations");
  bench->add_option("--row-fraction", bench_config.row_fraction, "search row subsample fraction");

  // quantize
  auto* quantize = app.add_subcommand("quantize", "quantize one layer to a WSQZ container");
  QuantizeArgs qargs;
  quantize->add_option("--weights", qargs.weights_path, "W as WSMX")->required();
  quantize->add_option("--sigma", qargs.sigma_path, "Sigma_X as WSMX")->required();
  quantize->add_option("--sigma-xhat", qargs.sigma_xhat_path, "Sigma_Xhat as WSMX");
  quantize->add_option("--sigma-cross", qargs.sigma_cross_path, "Sigma_{X,Xhat} as WSMX");
  quantize->add_option("--sigma-delta", qargs.sigma_delta_path, "Sigma_{Delta,Xhat} as WSMX");
  quantize->add_option("--out", qargs.out_path, "output container path")->required();
  quantize->add_option("--rate", qargs.rate, "target effective rate, bits/weight");
  quantize->add_option("--scale-c", qargs.scale_c, "fixed scale c (skips the rate search)");
  quantize->add_option("--delta", qargs.delta, "damping fraction");
  quantize->add_option("--tau", qargs.tau, "dead-feature threshold");
  quantize->add_option("--spacing", qargs.spacing, "watersic | uniform");
  quantize->add_option("--lmmse", qargs.lmmse, "on | off");
  quantize->add_option("--rescaler", qargs.rescaler, "on | off");
  quantize->add_option("--iterations", qargs.iterations, "binary search iterations");
  quantize->add_option("--row-fraction", qargs.row_fraction, "search row subsample fraction");
  quantize->add_option("--seed", qargs.seed, "subsample seed");

  // dequantize
  auto* dequant = app.add_subcommand("dequantize", "expand a WSQZ container to a WSMX matrix");
  std::string dq_container, dq_out;
  dequant->add_option("--container", dq_container, "input container")->required();
  dequant->add_option("--out", dq_out, "output WSMX path")->required();

  // waterfill
  auto* waterfill = app.add_subcommand("waterfill", "reverse-waterfilling rate for a spectrum");
  std::string wf_lambdas;
  double wf_distortion = 0.0, wf_sigma_w = 1.0;
  waterfill->add_option("--lambdas", wf_lambdas, "comma-separated eigenvalues")->required();
  waterfill->add_option("--distortion", wf_distortion, "target distortion")->required();
  waterfill->add_option("--sigma-w", wf_sigma_w, "weight standard deviation");

  auto* selftest = app.add_subcommand("selftest", "run the invariant suite");

  try {
    app.parse(argc, argv);
    if (bench->parsed()) {
      bench_config.lmmse = parse_on_off(bench_lmmse, "--lmmse");
      bench_config.rescaler = parse_on_off(bench_rescaler, "--rescaler");
      return cmd_bench_rd(bench_config, bench_csv);
    }
    if (quantize->parsed()) return cmd_quantize(qargs);
    if (dequant->parsed()) return cmd_dequantize(dq_container, dq_out);
    if (waterfill->parsed()) return cmd_waterfill(wf_lambdas, wf_distortion, wf_sigma_w);
    if (selftest->parsed()) return run_selftest(std::cout) == 0 ? 0 : 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace watersic
