// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <array>

#include "test_support.hpp"
#include "watersic/entropy_codec.hpp"
#include "watersic/wtheory.hpp"
#include "watersic/ziccore.hpp"

using namespace watersic;
using namespace watersic::test;

namespace {

SpacingVector unit_spacing(std::size_t n) {
  SpacingVector s;
  s.alphas.assign(n, 1.0);
  s.scale_c = 1.0;
  return s;
}

double row_distortion(const DenseMatrix& y, const CodeMatrix& z,
                      const std::vector<double>& alphas, const LowerTriangular& l) {
  const DenseMatrix r = zsic_residual(y, z, alphas, l);
  double acc = 0.0;
  for (double v : r.data()) acc += v * v;
  return acc;
}

}  // namespace

TEST_CASE("zsic scalar round") {
  LowerTriangular l(1);
  l(0, 0) = 1.0;
  const CodeMatrix z = zsic(dense(1, 1, {0.7}), l, unit_spacing(1));
  CHECK(z(0, 0) == 1);
}

TEST_CASE("zsic hand trace, first example") {
  const LowerTriangular l = lower(2, {1, 0, 0.5, 1});
  const DenseMatrix y = dense(1, 2, {0.7, 0.3});
  const CodeMatrix z = zsic(y, l, unit_spacing(2));
  CHECK(z(0, 0) == 1);
  CHECK(z(0, 1) == 0);
  const DenseMatrix r = zsic_residual(y, z, {1, 1}, l);
  CHECK(r(0, 0) == doctest::Approx(-0.3));
  CHECK(r(0, 1) == doctest::Approx(0.3));
}

TEST_CASE("zsic hand trace, second example") {
  const LowerTriangular l = lower(2, {1, 0, 0.5, 1});
  const DenseMatrix y = dense(1, 2, {0.1, 0.6});
  const CodeMatrix z = zsic(y, l, unit_spacing(2));
  CHECK(z(0, 0) == 0);
  CHECK(z(0, 1) == 1);
  const DenseMatrix r = zsic_residual(y, z, {1, 1}, l);
  CHECK(r(0, 0) == doctest::Approx(-0.4));
  CHECK(r(0, 1) == doctest::Approx(-0.4));
}

TEST_CASE("zsic rows are independent: block splits compose exactly") {
  Rng rng(50);
  const std::size_t a = 17, n = 6;
  const LowerTriangular l = random_lower(n, rng);
  SpacingVector s;
  s.alphas.resize(n);
  for (double& v : s.alphas) v = rng.uniform(0.4, 1.8);
  const DenseMatrix y = gaussian(a, n, rng, 2.0);
  const CodeMatrix full = zsic(y, l, s);
  for (std::size_t split : {std::size_t{1}, std::size_t{5}, std::size_t{16}}) {
    DenseMatrix top(split, n), bottom(a - split, n);
    for (std::size_t i = 0; i < split; ++i) {
      std::copy(y.row(i), y.row(i) + n, top.row(i));
    }
    for (std::size_t i = split; i < a; ++i) {
      std::copy(y.row(i), y.row(i) + n, bottom.row(i - split));
    }
    const CodeMatrix zt = zsic(top, l, s);
    const CodeMatrix zb = zsic(bottom, l, s);
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(full(i, j) == (i < split ? zt(i, j) : zb(i - split, j)));
      }
    }
  }
}

TEST_CASE("zsic leaves the input matrix untouched") {
  Rng rng(51);
  const LowerTriangular l = random_lower(4, rng);
  const DenseMatrix y = gaussian(3, 4, rng);
  const DenseMatrix copy = y;
  zsic(y, l, unit_spacing(4));
  CHECK(max_abs_diff(y, copy) == 0.0);
}

TEST_CASE("plain watersic spacing: identity factor") {
  LowerTriangular eye(3);
  for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
  const SpacingVector s = plain_watersic_spacing(eye, 0.25);
  for (double a : s.alphas) CHECK(a == doctest::Approx(0.25));
}

TEST_CASE("plain watersic spacing: diag (2, 0.5)") {
  const LowerTriangular l = lower(2, {2, 0, 0, 0.5});
  const SpacingVector s = plain_watersic_spacing(l, 1.0);
  CHECK(s.alphas[0] == doctest::Approx(0.5));
  CHECK(s.alphas[1] == doctest::Approx(2.0));
  CHECK(s.alphas[0] * s.alphas[1] == doctest::Approx(1.0).epsilon(1e-10));
  // alpha_i * l_ii is constant
  CHECK(s.alphas[0] * l(0, 0) == doctest::Approx(s.alphas[1] * l(1, 1)).epsilon(1e-12));
}

TEST_CASE("plain watersic spacing preserves density on random factors") {
  Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.next_u64() % 8);
    const LowerTriangular l = random_lower(n, rng);
    const double alpha = rng.uniform(0.1, 2.0);
    const SpacingVector s = plain_watersic_spacing(l, alpha);
    double log_prod = 0.0;
    for (double a : s.alphas) log_prod += std::log(a);
    CHECK(std::exp(log_prod) ==
          doctest::Approx(std::pow(alpha, static_cast<double>(n))).epsilon(1e-10));
  }
}

TEST_CASE("uniform spacing ignores the factor diagonal") {
  Rng rng(53);
  const LowerTriangular l = random_lower(3, rng);
  const SpacingVector s = uniform_spacing(l, 0.7);
  for (double a : s.alphas) CHECK(a == 0.7);
}

TEST_CASE("fundamental cell bound over random draws") {
  Rng rng(54);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.next_u64() % 8);
    const LowerTriangular l = random_lower(n, rng);
    SpacingVector s;
    s.alphas.resize(n);
    for (double& a : s.alphas) a = rng.uniform(0.3, 2.0);
    const DenseMatrix y = gaussian(1, n, rng, 3.0);
    const CodeMatrix z = zsic(y, l, s);
    const DenseMatrix r = zsic_residual(y, z, s.alphas, l);
    for (std::size_t i = 0; i < n; ++i) {
      const double half = 0.5 * s.alphas[i] * l(i, i);
      CHECK(r(0, i) >= -half);
      CHECK(r(0, i) < half);
    }
  }
}

TEST_CASE("shift covariance holds exactly") {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.next_u64() % 6);
    const LowerTriangular l = random_lower(n, rng);
    SpacingVector s;
    s.alphas.resize(n);
    for (double& a : s.alphas) a = rng.uniform(0.3, 2.0);
    const DenseMatrix y = gaussian(1, n, rng, 2.0);
    std::vector<int> shift(n);
    for (int& v : shift) v = static_cast<int>(rng.next_u64() % 9) - 4;
    DenseMatrix shifted = y;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i; k < n; ++k) {
        shifted(0, i) += static_cast<double>(shift[k]) * s.alphas[k] * l(k, i);
      }
    }
    const CodeMatrix z0 = zsic(y, l, s);
    const CodeMatrix z1 = zsic(shifted, l, s);
    for (std::size_t k = 0; k < n; ++k) CHECK(z1(0, k) == z0(0, k) + shift[k]);
  }
}

TEST_CASE("the zero decision region is the fundamental cell") {
  Rng rng(56);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.next_u64() % 6);
    const LowerTriangular l = random_lower(n, rng);
    SpacingVector s;
    s.alphas.resize(n);
    for (double& a : s.alphas) a = rng.uniform(0.3, 2.0);
    DenseMatrix y(1, n);
    for (std::size_t i = 0; i < n; ++i) {
      y(0, i) = (rng.uniform() - 0.5) * s.alphas[i] * l(i, i) * 0.999;
    }
    const CodeMatrix z = zsic(y, l, s);
    for (std::size_t k = 0; k < n; ++k) CHECK(z(0, k) == 0);
  }
}

TEST_CASE("zsic_lmmse gain formula on a single column") {
  LowerTriangular l(1);
  l(0, 0) = 1.0;
  const auto [codes, gains] = zsic_lmmse(dense(2, 1, {0.9, 2.1}), l, 1.0);
  CHECK(codes(0, 0) == 1);
  CHECK(codes(1, 0) == 2);
  CHECK(gains.gammas[0] == doctest::Approx(1.02).epsilon(1e-12));
}

TEST_CASE("zsic_lmmse zero column gets a zero gain") {
  LowerTriangular l(1);
  l(0, 0) = 1.0;
  const auto [codes, gains] = zsic_lmmse(dense(2, 1, {0.1, -0.2}), l, 1.0);
  CHECK(codes(0, 0) == 0);
  CHECK(codes(1, 0) == 0);
  CHECK(gains.gammas[0] == 0.0);
}

TEST_CASE("zsic_lmmse on-grid input gives unit gains") {
  Rng rng(57);
  const std::size_t n = 4, a = 6;
  const LowerTriangular l = random_lower(n, rng);
  const double c = 0.5;
  const SpacingVector s = spacing_from_scale(l, c, SpacingMode::WaterSic);
  CodeMatrix z0(a, n);
  for (auto& v : z0.codes) v = static_cast<int>(rng.next_u64() % 9) - 4 + 5;  // nonzero-ish
  DenseMatrix y(a, n);
  for (std::size_t r = 0; r < a; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = j; k < n; ++k) {
        acc += static_cast<double>(z0(r, k)) * s.alphas[k] * l(k, j);
      }
      y(r, j) = acc;
    }
  }
  const auto [codes, gains] = zsic_lmmse(y, l, c);
  CHECK(codes.codes == z0.codes);
  for (double g : gains.gammas) CHECK(g == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zsic_lmmse rejects a non-positive scale") {
  LowerTriangular l(1);
  l(0, 0) = 1.0;
  CHECK_THROWS_AS(zsic_lmmse(dense(1, 1, {0.5}), l, 0.0), NonPositiveScale);
}

TEST_CASE("the LMMSE gain never hurts a column") {
  // replay the internal per-column problem from the outputs
  Rng rng(58);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5, a = 8;
    const LowerTriangular l = random_lower(n, rng);
    const double c = rng.uniform(0.2, 1.5);
    const SpacingVector s = spacing_from_scale(l, c, SpacingMode::WaterSic);
    const DenseMatrix y = gaussian(a, n, rng, 2.0);
    const auto [codes, gains] = zsic_gains(y, l, s);
    // reconstruct the partial Y each column saw: subtract contributions of
    // later columns (with their gains) from the raw input
    for (std::size_t col = 0; col < n; ++col) {
      std::vector<double> y_partial(a);
      for (std::size_t r = 0; r < a; ++r) {
        double v = y(r, col);
        for (std::size_t k = col + 1; k < n; ++k) {
          v -= gains.gammas[k] * s.alphas[k] * static_cast<double>(codes(r, k)) * l(k, col);
        }
        y_partial[r] = v;
      }
      double with_gain = 0.0, without = 0.0;
      const double cell = s.alphas[col] * l(col, col);
      for (std::size_t r = 0; r < a; ++r) {
        const double zc = cell * static_cast<double>(codes(r, col));
        with_gain += (y_partial[r] - gains.gammas[col] * zc) * (y_partial[r] - gains.gammas[col] * zc);
        without += (y_partial[r] - zc) * (y_partial[r] - zc);
      }
      CHECK(with_gain <= without + 1e-12 * (1.0 + without));
    }
  }
}

TEST_CASE("small-n exhaustive search never beats zsic, rtn rarely does") {
  Rng rng(59);
  const int k_box = 8;
  int zsic_beats_rtn = 0;
  const int trials = 40;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = 3;
    const LowerTriangular l = random_lower(n, rng, 0.6);
    SpacingVector s;
    s.alphas.resize(n);
    for (double& a : s.alphas) a = rng.uniform(0.5, 1.5);
    const DenseMatrix w = gaussian(1, n, rng);
    const DenseMatrix y = multiply(w, l);
    const CodeMatrix z = zsic(y, l, s);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(z(0, i)) <= k_box);
    const double d_zsic = row_distortion(y, z, s.alphas, l);

    double d_best = 1e300;
    CodeMatrix cand(1, n);
    for (int a0 = -k_box; a0 <= k_box; ++a0) {
      for (int a1 = -k_box; a1 <= k_box; ++a1) {
        for (int a2 = -k_box; a2 <= k_box; ++a2) {
          cand.at(0, 0) = a0;
          cand.at(0, 1) = a1;
          cand.at(0, 2) = a2;
          d_best = std::min(d_best, row_distortion(y, cand, s.alphas, l));
        }
      }
    }
    CHECK(d_best <= d_zsic + 1e-12);

    CodeMatrix rtn(1, n);
    for (std::size_t i = 0; i < n; ++i) {
      rtn.at(0, i) = static_cast<int>(round_away(w(0, i) / s.alphas[i]));
    }
    if (d_zsic <= row_distortion(y, rtn, s.alphas, l) + 1e-12) ++zsic_beats_rtn;
  }
  CHECK(zsic_beats_rtn >= trials * 9 / 10);
}

TEST_CASE("reconstruct trivial cases") {
  CodeMatrix z(1, 1);
  z.at(0, 0) = 2;
  const DenseMatrix w = reconstruct(z, std::array{0.5}, std::array{1.02}, std::array{1.0});
  CHECK(w(0, 0) == doctest::Approx(1.02).epsilon(1e-15));
}

TEST_CASE("reconstruct with unit gains is Z diag(alpha)") {
  Rng rng(60);
  CodeMatrix z(3, 2);
  for (auto& v : z.codes) v = static_cast<int>(rng.next_u64() % 7) - 3;
  const std::vector<double> alphas{0.5, 2.0};
  const std::vector<double> ones_n(2, 1.0);
  const std::vector<double> ones_a(3, 1.0);
  const DenseMatrix w = reconstruct(z, alphas, ones_n, ones_a);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(w(i, j) == static_cast<double>(z(i, j)) * alphas[j]);
    }
  }
}

TEST_CASE("reconstruct keeps dead columns at zero") {
  CodeMatrix z(2, 3);
  z.at(0, 0) = 1;
  z.at(1, 2) = -2;
  const std::vector<double> alphas{1.0, 0.0, 1.0};
  const std::vector<double> gammas{1.0, 0.0, 1.0};
  const std::vector<double> t{1.0, 1.0};
  const DenseMatrix w = reconstruct(z, alphas, gammas, t);
  CHECK(w(0, 1) == 0.0);
  CHECK(w(1, 1) == 0.0);
}

TEST_CASE("layer_distortion basics") {
  Rng rng(61);
  const DenseMatrix w = gaussian(3, 4, rng);
  const SymmetricMatrix sigma = random_spd(4, rng);
  CHECK(layer_distortion(w, w, sigma) == 0.0);

  // identity sigma reduces to the scaled Frobenius norm
  const DenseMatrix w2 = gaussian(3, 4, rng);
  DenseMatrix diff(3, 4);
  for (std::size_t i = 0; i < diff.size(); ++i) diff.data()[i] = w.data()[i] - w2.data()[i];
  CHECK(layer_distortion(w, w2, SymmetricMatrix::identity(4)) ==
        doctest::Approx(frobenius(diff) * frobenius(diff) / 12.0).epsilon(1e-12));
}

TEST_CASE("layer_distortion diagonal example") {
  const DenseMatrix w = dense(1, 2, {1, 0});
  const DenseMatrix w_hat = dense(1, 2, {0, 0});
  const SymmetricMatrix sigma = sym(2, {3, 0, 0, 1});
  CHECK(layer_distortion(w, w_hat, sigma) == doctest::Approx(1.5));
}

TEST_CASE("plain pipeline: spacing, zsic, per-column coding, reconstruction") {
  Rng rng(63);
  const std::size_t a = 128, n = 12;
  const SymmetricMatrix sigma = random_spd(n, rng, 0.2);
  const LowerTriangular l = cholesky(sigma);
  const DenseMatrix w = gaussian(a, n, rng);
  const DenseMatrix y = multiply(w, l);
  const SpacingVector spacing = plain_watersic_spacing(l, 0.05);
  const CodeMatrix z = zsic(y, l, spacing);

  // codes survive the per-column entropy coder
  const auto columns = huffman_encode_columns(z);
  CHECK(huffman_decode_columns(columns, a).codes == z.codes);

  // empirical distortion tracks the uniform-cell prediction at high rate
  const std::vector<double> ones_n(n, 1.0);
  const std::vector<double> ones_a(a, 1.0);
  const DenseMatrix w_hat = reconstruct(z, spacing.alphas, ones_n, ones_a);
  const double d = layer_distortion(w, w_hat, sigma);
  const double d_pred = zsic_distortion_prediction(l, spacing);
  CHECK(std::abs(d / d_pred - 1.0) < 0.1);
}

TEST_CASE("watersic spacing beats uniform spacing at matched density") {
  Rng rng(62);
  std::vector<double> ratio;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 16, a = 256;
    const SymmetricMatrix sigma = random_spd(n, rng, 0.05);
    const LowerTriangular l = cholesky(sigma);
    const DenseMatrix w = gaussian(a, n, rng);
    const DenseMatrix y = multiply(w, l);
    const double c = 0.02;  // high rate
    const SpacingVector sw = spacing_from_scale(l, c, SpacingMode::WaterSic);
    const SpacingVector su = spacing_from_scale(l, c, SpacingMode::Uniform);
    const CodeMatrix zw = zsic(y, l, sw);
    const CodeMatrix zu = zsic(y, l, su);
    double dw = 0.0, du = 0.0;
    const DenseMatrix rw = zsic_residual(y, zw, sw.alphas, l);
    const DenseMatrix ru = zsic_residual(y, zu, su.alphas, l);
    for (double v : rw.data()) dw += v * v;
    for (double v : ru.data()) du += v * v;
    ratio.push_back(dw / du);
  }
  std::sort(ratio.begin(), ratio.end());
  CHECK(ratio[ratio.size() / 2] <= 1.0);
}
