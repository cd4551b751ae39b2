#include <bitset>

#include "doctest.h"
#include "oracles.hpp"
#include "otfdm/sequences.hpp"

using namespace otfdm;

TEST_CASE("constellations have unit mean power") {
  for (auto m : kAllModulations) {
    CAPTURE(to_string(m));
    const ComplexVec c = constellation(m);
    CHECK(c.size() == (1 << bits_per_symbol(m)));
    CHECK(c.cwiseAbs2().mean() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("QAM mappings are Gray coded") {
  for (auto m : {Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64, Modulation::Qam256}) {
    CAPTURE(to_string(m));
    const ComplexVec c = constellation(m);
    double dmin = 1e9;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      for (Eigen::Index j = i + 1; j < c.size(); ++j) dmin = std::min(dmin, std::abs(c(i) - c(j)));
    }
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      for (Eigen::Index j = 0; j < c.size(); ++j) {
        if (i != j && std::abs(c(i) - c(j)) < dmin * 1.0001) {
          CHECK(std::bitset<8>(static_cast<unsigned>(i ^ j)).count() == 1);
        }
      }
    }
  }
}

TEST_CASE("modulate examples") {
  const std::vector<std::uint8_t> qpsk{0, 0};
  CHECK(std::abs(modulate(qpsk, Modulation::Qpsk)(0) - Complex(1, 1) / std::sqrt(2.0)) < 1e-15);

  const std::vector<std::uint8_t> pi2{0, 0, 1, 1};
  const ComplexVec s = modulate(pi2, Modulation::Pi2Bpsk);
  const Complex a = Complex(1, 1) / std::sqrt(2.0);
  CHECK(std::abs(s(0) - a) < 1e-15);
  CHECK(std::abs(s(1) - Complex(0, 1) * a) < 1e-15);
  for (Eigen::Index n = 1; n < s.size(); ++n) {
    const double turn = std::abs(std::arg(s(n) / s(n - 1)));
    CHECK(std::abs(turn - kPi / 2.0) < 1e-12);
  }
  // An odd starting index flips the rotation phase.
  CHECK(std::abs(modulate(pi2, Modulation::Pi2Bpsk, 1)(0) - Complex(0, 1) * a) < 1e-15);

  const std::vector<std::uint8_t> three{0, 1, 1};
  CHECK_THROWS_AS(modulate(three, Modulation::Qpsk), InvalidArgument);
  CHECK(parse_modulation("qam64") == Modulation::Qam64);
  CHECK_THROWS_AS(parse_modulation("8psk"), InvalidArgument);
}

TEST_CASE("Zadoff-Chu sequences") {
  const ComplexVec r = zadoff_chu(1, 3);
  CHECK(std::abs(r(0) - 1.0) < 1e-15);
  CHECK(std::abs(r(1) - std::polar(1.0, -2.0 * kPi / 3.0)) < 1e-15);
  CHECK(std::abs(r(2) - 1.0) < 1e-14);

  for (auto [root, len] : {std::pair{1, 7}, {5, 71}, {25, 139}, {2, 9}}) {
    CHECK((zadoff_chu(root, len).cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
  }

  const RealVec mag = oracle::direct_dft(zadoff_chu(1, 139)).cwiseAbs();
  CHECK(mag.maxCoeff() - mag.minCoeff() < 1e-9);

  CHECK_THROWS_AS(zadoff_chu(3, 12), InvalidArgument);

  // Cyclic extension of the largest prime below the requested length.
  const ComplexVec ext = zc_reference(12, 1);
  const ComplexVec base = zadoff_chu(1, 11);
  CHECK(std::abs(ext(11) - base(0)) < 1e-15);
  CHECK((ext.head(11) - base).norm() < 1e-15);
}

TEST_CASE("RS block construction") {
  ComplexVec rs(4);
  rs << 1.0, 2.0, 3.0, 4.0;
  ComplexVec want(7);
  want << 3.0, 4.0, 1.0, 2.0, 3.0, 4.0, 1.0;
  CHECK((build_rs_block(rs, FrameLayout::two_sided(4, 2, 1, 0)) - want).norm() == 0.0);
  CHECK((build_rs_block(rs, FrameLayout::two_sided(4, 0, 0, 5)) - rs).norm() == 0.0);

  ComplexVec ab(2);
  ab << 1.0, 2.0;
  ComplexVec abab(4);
  abab << 1.0, 2.0, 1.0, 2.0;
  CHECK((build_rs_block(ab, FrameLayout::one_sided(2, 3)) - abab).norm() == 0.0);

  CHECK_THROWS_AS(build_rs_block(rs, FrameLayout{4, 5, 0, 0}), InvalidArgument);
  CHECK_THROWS_AS(build_rs_block(ab, FrameLayout::two_sided(4, 1, 1, 0)), InvalidArgument);
  CHECK_THROWS_AS(FrameLayout::two_sided(4, 1, 5, 0), InvalidArgument);
}

TEST_CASE("every l_r window inside the RS block is a cyclic shift of the core") {
  const ComplexVec core = zc_reference(12);
  const auto layout = FrameLayout::two_sided(12, 5, 3, 10);
  const ComplexVec block = build_rs_block(core, layout);
  for (int start = 0; start <= layout.l_cp + layout.l_cs; ++start) {
    for (int n = 0; n < layout.l_r; ++n) {
      const int src = ((start - layout.l_cp + n) % layout.l_r + layout.l_r) % layout.l_r;
      CHECK(block(start + n) == core(src));
    }
  }
}

TEST_CASE("SQRC filter") {
  const auto rect = make_sqrc_filter(16, 0);
  CHECK(rect.weights.size() == 16);
  CHECK((rect.weights.array() == 1.0).all());

  const auto f = make_sqrc_filter(240, 6);
  CHECK(f.extended_size() == 252);
  CHECK(f.weight(-6) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(f.weight(0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(f.weight(6) == 1.0);
  CHECK(f.weight(-7) == 0.0);
  CHECK(f.weight(246) == 0.0);
  CHECK(f.extension_pct() == doctest::Approx(5.0));
  for (int k = -6; k < 246; ++k) CHECK(f.weight(k) == doctest::Approx(oracle::sqrc_gain(k, 240, 6)).epsilon(1e-14));

  CHECK_THROWS_AS(make_sqrc_filter(10, 6), InvalidArgument);
}

TEST_CASE("SQRC filters are fold-flat") {
  for (int M : {12, 48, 240, 2400}) {
    for (double pct : {0.0, 1.0, 5.0, 10.0, 25.0, 50.0, 100.0}) {
      const auto f = make_sqrc_filter(M, gamma_for_extension(M, pct));
      CAPTURE(M);
      CAPTURE(pct);
      CHECK((fold_power(f).array() - 1.0).abs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("tap filters") {
  const std::vector<double> two{1.0, -1.0};
  const auto f = make_taps_filter(two, 4);
  RealVec raw(4);
  for (int k = 0; k < 4; ++k) raw(k) = std::abs(1.0 - std::polar(1.0, -2.0 * kPi * k / 4.0));
  raw /= std::sqrt(raw.squaredNorm() / 4.0);
  CHECK((f.weights - raw).norm() < 1e-14);
  CHECK(f.weights.squaredNorm() / 4.0 == doctest::Approx(1.0));
  CHECK(f.weights(0) == 0.0);

  const std::vector<double> three{-0.28, 1.0, -0.28};
  const auto g = make_taps_filter(three, 240);
  CHECK(g.weights.squaredNorm() / 240 == doctest::Approx(1.0));
  CHECK(g.weights(0) < 0.7);
  CHECK(g.weights(120) > 1.3);

  // The end-to-end reference response is |w|^2 on any grid that matches M.
  const ComplexVec resp = taps_reference_response(g, 240);
  CHECK((resp.real() - g.weights.cwiseAbs2()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(resp.imag().cwiseAbs().maxCoeff() == 0.0);
  CHECK((taps_reference_response(make_sqrc_filter(24, 2), 6).array() == Complex(1.0)).all());

  const std::vector<double> four{1, 1, 1, 1};
  CHECK_THROWS_AS(make_taps_filter(four, 16), InvalidArgument);
}

TEST_CASE("rounding helpers") {
  CHECK(round_even(5.5) == 6);
  CHECK(round_even(2.77) == 2);
  CHECK(round_even(3.1) == 4);
  CHECK(gamma_for_extension(240, 5.0) == 6);
  CHECK(gamma_for_extension(240, 10.0) == 12);
}
