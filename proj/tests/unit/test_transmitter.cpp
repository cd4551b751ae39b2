#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "otfdm/transmitter.hpp"

using namespace otfdm;

namespace {

WaveformGrid grid_with(int M, int gamma, int N, int n_cp) {
  WaveformGrid g;
  g.M = M;
  g.gamma = gamma;
  g.N = N;
  g.n_cp = n_cp;
  g.validate();
  return g;
}

ComplexVec qpsk_symbols(Eigen::Index n, SeededRng& rng) {
  const BitVec bits = rng.bits(static_cast<std::size_t>(2 * n));
  return modulate(bits, Modulation::Qpsk);
}

}  // namespace

TEST_CASE("make_grid") {
  const auto g = make_grid(240, 6, 30.0, 4);
  CHECK(g.N == 1024);
  CHECK(g.n_cp == 72);
  CHECK(g.first_subcarrier() == -126);
  CHECK(g.sample_rate_hz() == doctest::Approx(30.72e6));
  CHECK_THROWS_AS(grid_with(240, 6, 128, 0), InvalidArgument);
}

TEST_CASE("multiplex_symbol ordering") {
  ComplexVec rs(2), d(1), none(0);
  rs << 1.0, 2.0;
  d << 3.0;
  ComplexVec want(3);
  want << 1.0, 2.0, 3.0;
  CHECK((multiplex_symbol(d, rs, none, FrameLayout::two_sided(2, 0, 0, 1)) - want).norm() == 0.0);

  ComplexVec r(1), d2(2), a(1);
  r << 1.0;
  d2 << 2.0, 3.0;
  a << 4.0;
  const ComplexVec x = multiplex_symbol(d2, r, a, FrameLayout::two_sided(1, 0, 0, 2, 1));
  CHECK(x(3) == Complex(4.0));

  const auto pi2 = FrameLayout::two_sided(72, 56, 18, 3120 - 146);
  CHECK(pi2.l_rs() == 146);
  CHECK(pi2.data_begin() == 146);
  CHECK_THROWS_AS(multiplex_symbol(d, rs, a, FrameLayout::two_sided(2, 0, 0, 1)), InvalidArgument);
}

TEST_CASE("precode_extend_shape") {
  SeededRng rng(3);
  SUBCASE("identity shaping is the DFT") {
    const ComplexVec x = qpsk_symbols(24, rng);
    CHECK(oracle::max_abs_diff(precode_extend_shape(x, make_unity_filter(24)), oracle::direct_dft(x)) < 1e-12);
  }
  SUBCASE("impulse gives the filter weights") {
    ComplexVec x = ComplexVec::Zero(40);
    x(0) = 1.0;
    const auto f = make_sqrc_filter(40, 5);
    CHECK((precode_extend_shape(x, f) - f.weights.cast<Complex>()).norm() < 1e-14);
  }
  SUBCASE("direct formula, M = 12, gamma = 3") {
    const ComplexVec x = oracle::random_vector(12, 77);
    const auto f = make_sqrc_filter(12, 3);
    const ComplexVec out = precode_extend_shape(x, f);
    REQUIRE(out.size() == 18);
    for (int kp = -3; kp < 15; ++kp) {
      Complex acc = 0.0;
      for (int n = 0; n < 12; ++n) acc += x(n) * std::polar(1.0, -2.0 * kPi * kp * n / 12.0);
      CHECK(std::abs(out(kp + 3) - oracle::sqrc_gain(kp, 12, 3) * acc) < 1e-12);
    }
  }
  CHECK_THROWS_AS(precode_extend_shape(ComplexVec::Zero(10), make_unity_filter(12)), InvalidArgument);
}

TEST_CASE("map_and_modulate") {
  SeededRng rng(5);
  SUBCASE("symbol CP is a copy of the tail") {
    const auto g = make_grid(240, 12, 30.0, 4);
    const auto sym = map_and_modulate(oracle::random_vector(264, 1), g);
    REQUIRE(sym.time_samples.size() == g.N + g.n_cp);
    CHECK((sym.time_samples.head(g.n_cp) - sym.time_samples.tail(g.n_cp)).norm() == 0.0);
  }
  SUBCASE("single tone has constant envelope") {
    const auto g = make_grid(48, 0, 30.0, 4);
    ComplexVec x = ComplexVec::Zero(48);
    x(24) = 1.0;
    const RealVec mag = map_and_modulate(x, g).time_samples.cwiseAbs();
    CHECK(mag.maxCoeff() - mag.minCoeff() < 1e-12);
  }
  SUBCASE("spectrum stays inside the mapped window") {
    const auto g = grid_with(240, 12, 1024, 72);
    const auto sym = map_and_modulate(oracle::random_vector(264, 2), g);
    const ComplexVec spec = oracle::direct_dft(sym.time_samples.tail(g.N));
    double outside = 0.0;
    for (int b = 0; b < g.N; ++b) {
      const int k = b < g.N / 2 ? b : b - g.N;
      if (k < -132 || k >= 132) outside = std::max(outside, std::abs(spec(b)));
    }
    CHECK(outside < 1e-9);
  }
  SUBCASE("unit-power symbols give unit mean sample power") {
    const auto g = make_grid(240, 6, 30.0, 4);
    const auto f = make_sqrc_filter(240, 6);
    double power = 0.0;
    for (int t = 0; t < 200; ++t) {
      const auto sym = map_and_modulate(precode_extend_shape(qpsk_symbols(240, rng), f), g);
      power += sym.time_samples.tail(g.N).squaredNorm() / g.N;
    }
    CHECK(power / 200 == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("generation is linear") {
  SeededRng rng(9);
  const auto layout = FrameLayout::two_sided(12, 8, 4, 216, 0);
  const auto f = make_sqrc_filter(240, 6);
  const auto g = make_grid(240, 6);
  ReferenceSignals refs{zc_reference(12), ComplexVec(0)};
  const ComplexVec d = qpsk_symbols(216, rng);
  const Complex a(0.3, -1.7);
  ReferenceSignals scaled{refs.rs_core * a, ComplexVec(0)};
  const auto s1 = generate_from_symbols(d, refs, layout, f, g);
  const auto s2 = generate_from_symbols(d * a, scaled, layout, f, g);
  CHECK((s2.time_samples - a * s1.time_samples).norm() < 1e-12 * s2.time_samples.norm());
}

TEST_CASE("reduces to plain DFT-s-OFDM without extension, shaping or RS guards") {
  SeededRng rng(10);
  const auto layout = FrameLayout::two_sided(16, 0, 0, 48);
  const auto g = grid_with(64, 0, 256, 18);
  ReferenceSignals refs{zc_reference(16), ComplexVec(0)};
  const ComplexVec d = qpsk_symbols(48, rng);
  const auto sym = generate_from_symbols(d, refs, layout, make_unity_filter(64), g);

  ComplexVec x(64);
  x << refs.rs_core, d;
  const ComplexVec X = oracle::direct_dft(x);
  ComplexVec grid_bins = ComplexVec::Zero(256);
  for (int i = 0; i < 64; ++i) grid_bins((i - 32 + 256) % 256) = X(i);
  const ComplexVec body = oracle::direct_dft(grid_bins, true) * (256.0 / 64.0);
  CHECK(oracle::max_abs_diff(sym.time_samples.tail(256), body) < 1e-12);
  CHECK(oracle::max_abs_diff(sym.time_samples.head(18), body.tail(18)) < 1e-12);
}

TEST_CASE("effective pulse") {
  SUBCASE("rectangular spectrum is a Dirichlet kernel with symbol-spaced zeros") {
    const auto g = grid_with(64, 0, 256, 0);
    const ComplexVec p = effective_pulse(make_unity_filter(64), g);
    CHECK(std::abs(p(128) - 1.0) < 1e-15);
    for (int n = 1; n < 32; ++n) {
      CHECK(std::abs(p(128 + 4 * n)) < 1e-12);
      CHECK(std::abs(p(128 - 4 * n)) < 1e-12);
    }
  }
  SUBCASE("fold-flat SQRC keeps zero ISI") {
    const auto g = grid_with(64, 8, 512, 0);
    const ComplexVec p = effective_pulse(make_sqrc_filter(64, 8), g);
    for (int n = 1; n < 32; ++n) CHECK(std::abs(p(256 + 8 * n)) < 1e-12);
  }
  SUBCASE("extension shortens the tails") {
    const auto f0 = make_sqrc_filter(240, 0);
    const auto f10 = make_sqrc_filter(240, 12);
    const auto g0 = make_grid(240, 0), g10 = make_grid(240, 12);
    CHECK(pulse_tail_fraction(effective_pulse(f10, g10), g10, 2.0) <
          pulse_tail_fraction(effective_pulse(f0, g0), g0, 2.0));
  }
}

TEST_CASE("QPSK reference layout gives 5.4% RS overhead") {
  const auto layout = FrameLayout::two_sided(84, 63, 21, 3120 - 168);
  CHECK(100.0 * layout.l_rs() / layout.size() == doctest::Approx(5.4).epsilon(0.01));
}

TEST_CASE("generate_otfdm") {
  const auto layout = FrameLayout::two_sided(12, 8, 4, 214, 2);
  const auto f = make_sqrc_filter(240, 6);
  const auto g = make_grid(240, 6);
  SeededRng bits_rng(1);
  const BitVec bits = bits_rng.bits(214 * 4);

  SeededRng a(7), b(7);
  const auto s1 = generate_otfdm(bits, Modulation::Qam16, layout, f, g, a);
  const auto s2 = generate_otfdm(bits, Modulation::Qam16, layout, f, g, b);
  CHECK((s1.time_samples - s2.time_samples).norm() == 0.0);
  CHECK((s1.x_t.segment(layout.data_begin(), 214) - modulate(bits, Modulation::Qam16)).norm() == 0.0);
  CHECK((s1.x_t.tail(2) - zc_reference(2)).norm() == 0.0);

  BitVec short_bits(bits.begin(), bits.end() - 4);
  try {
    generate_otfdm(short_bits, Modulation::Qam16, layout, f, g, a);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "modulate");
  }
  try {
    generate_from_symbols(ComplexVec::Zero(214), ReferenceSignals{zc_reference(11), zc_reference(2)}, layout, f, g);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "build_rs_block");
  }
}

TEST_CASE("pi/2-BPSK with 2-tap shaping keeps a low PAPR") {
  const auto layout = FrameLayout::two_sided(6, 4, 2, 228);
  const std::vector<double> taps{1.0, -1.0};
  const auto f = make_taps_filter(taps, 240);
  const auto g = make_grid(240, 0);
  SeededRng rng(12);
  std::vector<double> samples;
  for (int t = 0; t < 400; ++t) {
    const auto sym = generate_otfdm(rng.bits(228), Modulation::Pi2Bpsk, layout, f, g, rng);
    const auto p = instantaneous_power_db(sym.time_samples.tail(g.N));
    samples.insert(samples.end(), p.begin(), p.end());
  }
  CHECK(ccdf_threshold(samples, 0.01) < 2.0);
}

TEST_CASE("waveform file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "otfdm_waveform_test.cf64";
  ComplexVec x(3);
  x << Complex(1.0, -2.0), Complex(0.5, 0.25), Complex(-3.0, 1e-3);
  write_waveform(path, x, {{"M", "240"}, {"scheme", "qpsk"}});

  CHECK(std::filesystem::file_size(path) == 48);
  std::ifstream raw(path, std::ios::binary);
  unsigned char first[8];
  raw.read(reinterpret_cast<char*>(first), 8);
  CHECK(first[7] == 0x3F);  // 1.0 little-endian: 00 .. 00 F0 3F
  CHECK(first[6] == 0xF0);

  CHECK((read_waveform(path) - x).norm() == 0.0);
  const auto hdr = read_waveform_header(path);
  CHECK(hdr.at("M") == "240");
  CHECK(hdr.at("samples") == "3");
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".hdr");
}
