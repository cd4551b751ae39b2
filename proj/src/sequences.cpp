#include "otfdm/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace otfdm {

int bits_per_symbol(Modulation m) {
  switch (m) {
    case Modulation::Pi2Bpsk: return 1;
    case Modulation::Qpsk: return 2;
    case Modulation::Qam16: return 4;
    case Modulation::Qam64: return 6;
    case Modulation::Qam256: return 8;
  }
  throw InvalidArgument("bits_per_symbol: unknown modulation");
}

std::string_view to_string(Modulation m) {
  switch (m) {
    case Modulation::Pi2Bpsk: return "pi2bpsk";
    case Modulation::Qpsk: return "qpsk";
    case Modulation::Qam16: return "qam16";
    case Modulation::Qam64: return "qam64";
    case Modulation::Qam256: return "qam256";
  }
  return "unknown";
}

Modulation parse_modulation(std::string_view name) {
  for (auto m : kAllModulations) {
    if (to_string(m) == name) return m;
  }
  if (name == "PI2_BPSK") return Modulation::Pi2Bpsk;
  if (name == "QPSK") return Modulation::Qpsk;
  if (name == "QAM16" || name == "16qam") return Modulation::Qam16;
  if (name == "QAM64" || name == "64qam") return Modulation::Qam64;
  if (name == "QAM256" || name == "256qam") return Modulation::Qam256;
  throw InvalidArgument("unknown modulation '" + std::string(name) + "'");
}

namespace {

// Gray PAM level for one axis from its bits (sign bit first), 3GPP TS 38.211 style:
// 16QAM: (1-2b0)(2-(1-2b2)), 64QAM: (1-2b0)(4-(1-2b2)(2-(1-2b4))), ...
double pam_level(const std::uint8_t* bits, int count, int stride) {
  double level = 1.0;
  for (int i = count - 1; i >= 1; --i) {
    level = static_cast<double>(1 << (count - i)) - (1.0 - 2.0 * bits[i * stride]) * level;
  }
  return (1.0 - 2.0 * bits[0]) * level;
}

Complex map_symbol(const std::uint8_t* b, Modulation m) {
  switch (m) {
    case Modulation::Pi2Bpsk: {
      const double s = (1.0 - 2.0 * b[0]) / std::sqrt(2.0);
      return {s, s};
    }
    case Modulation::Qpsk:
      return Complex(1.0 - 2.0 * b[0], 1.0 - 2.0 * b[1]) / std::sqrt(2.0);
    case Modulation::Qam16:
      return Complex(pam_level(b, 2, 2), pam_level(b + 1, 2, 2)) / std::sqrt(10.0);
    case Modulation::Qam64:
      return Complex(pam_level(b, 3, 2), pam_level(b + 1, 3, 2)) / std::sqrt(42.0);
    case Modulation::Qam256:
      return Complex(pam_level(b, 4, 2), pam_level(b + 1, 4, 2)) / std::sqrt(170.0);
  }
  return {};
}

}  // namespace

ComplexVec constellation(Modulation m) {
  const int bps = bits_per_symbol(m);
  const int count = 1 << bps;
  ComplexVec points(count);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(bps));
  for (int i = 0; i < count; ++i) {
    for (int b = 0; b < bps; ++b) bits[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((i >> (bps - 1 - b)) & 1);
    points(i) = map_symbol(bits.data(), m);
  }
  return points;
}

ComplexVec modulate(std::span<const std::uint8_t> bits, Modulation m, std::size_t first_index) {
  const auto bps = static_cast<std::size_t>(bits_per_symbol(m));
  if (bits.size() % bps != 0) throw InvalidArgument("modulate: bit count not divisible by bits per symbol");
  const auto count = static_cast<Eigen::Index>(bits.size() / bps);
  ComplexVec out(count);
  for (Eigen::Index n = 0; n < count; ++n) {
    Complex s = map_symbol(bits.data() + static_cast<std::size_t>(n) * bps, m);
    if (m == Modulation::Pi2Bpsk && (first_index + static_cast<std::size_t>(n)) % 2 == 1) {
      s *= Complex(0.0, 1.0);
    }
    out(n) = s;
  }
  return out;
}

ComplexVec zadoff_chu(int root, int length) {
  if (length < 1) throw InvalidArgument("zadoff_chu: length must be >= 1");
  if (std::gcd(root, length) != 1) throw InvalidArgument("zadoff_chu: gcd(root, length) != 1");
  ComplexVec r(length);
  for (int n = 0; n < length; ++n) {
    // Reduce the quadratic phase modulo 2*length before converting to radians.
    const long long q = (static_cast<long long>(root) * n % (2LL * length)) * (n + 1) % (2LL * length);
    r(n) = std::polar(1.0, -kPi * static_cast<double>(q) / length);
  }
  return r;
}

namespace {
bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}
}  // namespace

ComplexVec zc_reference(int length, int root) {
  if (length < 1) throw InvalidArgument("zc_reference: length must be >= 1");
  if (length == 1) return ComplexVec::Ones(1);
  int p = length;
  while (!is_prime(p)) --p;
  int r = root % p;
  if (r <= 0) r += p;
  const ComplexVec base = zadoff_chu(r, p);
  ComplexVec out(length);
  for (int n = 0; n < length; ++n) out(n) = base(n % p);
  return out;
}

void FrameLayout::validate() const {
  if (l_r < 1) throw InvalidArgument("FrameLayout: l_r must be >= 1");
  if (l_cp < 0 || l_cs < 0 || l_d < 0 || l_ars < 0) throw InvalidArgument("FrameLayout: negative length");
  if (l_cp > l_r || l_cs > l_r) throw InvalidArgument("FrameLayout: CP/CS longer than RS core");
  if (variant == LayoutVariant::OneSidedCp && (l_cs != 0 || l_cp != l_r)) {
    throw InvalidArgument("FrameLayout: one-sided layout requires l_cs = 0 and l_cp = l_r");
  }
}

FrameLayout FrameLayout::two_sided(int l_r, int l_cp, int l_cs, int l_d, int l_ars) {
  FrameLayout f{l_r, l_cp, l_cs, l_d, l_ars, LayoutVariant::TwoSided};
  f.validate();
  return f;
}

FrameLayout FrameLayout::one_sided(int l_r, int l_d, int l_ars) {
  FrameLayout f{l_r, l_r, 0, l_d, l_ars, LayoutVariant::OneSidedCp};
  f.validate();
  return f;
}

ComplexVec build_rs_block(const ComplexVec& rs_core, const FrameLayout& layout) {
  layout.validate();
  if (rs_core.size() != layout.l_r) throw InvalidArgument("build_rs_block: core length != l_r");
  ComplexVec block(layout.l_rs());
  block.head(layout.l_cp) = rs_core.tail(layout.l_cp);
  block.segment(layout.l_cp, layout.l_r) = rs_core;
  block.tail(layout.l_cs) = rs_core.head(layout.l_cs);
  return block;
}

double ShapingFilter::weight(int k_ext) const {
  const int i = k_ext + gamma;
  if (i < 0 || i >= weights.size()) return 0.0;
  return weights(i);
}

ShapingFilter make_sqrc_filter(int M, int gamma) {
  if (M < 1) throw InvalidArgument("make_sqrc_filter: M must be >= 1");
  if (gamma < 0 || 2 * gamma > M) throw InvalidArgument("make_sqrc_filter: gamma outside [0, M/2]");
  ShapingFilter f;
  f.M = M;
  f.gamma = gamma;
  f.kind = FilterKind::Sqrc;
  f.weights.resize(M + 2 * gamma);
  for (int k = -gamma; k < M + gamma; ++k) {
    double w = 1.0;
    if (k < gamma) {
      w = std::sqrt(0.5 * (1.0 + std::cos(kPi * (gamma - k) / (2.0 * gamma))));
    } else if (k >= M - gamma) {
      w = std::sqrt(0.5 * (1.0 + std::cos(kPi * (k - M + gamma) / (2.0 * gamma))));
    }
    f.weights(k + gamma) = w;
  }
  return f;
}

ShapingFilter make_taps_filter(std::span<const double> taps, int M) {
  if (taps.size() != 2 && taps.size() != 3) throw InvalidArgument("make_taps_filter: only 2 or 3 taps supported");
  if (M < static_cast<int>(taps.size())) throw InvalidArgument("make_taps_filter: M shorter than filter");
  ShapingFilter f;
  f.M = M;
  f.gamma = 0;
  f.kind = FilterKind::Taps;
  f.taps.assign(taps.begin(), taps.end());
  f.weights.resize(M);
  for (int k = 0; k < M; ++k) {
    Complex h = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
      h += taps[i] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k) * static_cast<double>(i) / M);
    }
    f.weights(k) = std::abs(h);
  }
  const double rms = std::sqrt(f.weights.squaredNorm() / M);
  if (!(rms > 0.0)) throw InvalidArgument("make_taps_filter: all-zero taps");
  f.weights /= rms;
  return f;
}

RealVec fold_power(const ShapingFilter& filter) {
  RealVec fold = RealVec::Zero(filter.M);
  for (int k = 0; k < filter.M; ++k) {
    for (int p = -1; p <= 1; ++p) {
      const double w = filter.weight(k + p * filter.M);
      fold(k) += w * w;
    }
  }
  return fold;
}

ComplexVec taps_reference_response(const ShapingFilter& filter, int length) {
  if (length < 1) throw InvalidArgument("taps_reference_response: length must be >= 1");
  if (filter.kind != FilterKind::Taps) return ComplexVec::Ones(length);
  const auto& t = filter.taps;
  const int L = static_cast<int>(t.size());
  double energy = 0.0;
  for (double v : t) energy += v * v;
  ComplexVec g(length);
  for (int k = 0; k < length; ++k) {
    double acc = 0.0;
    for (int lag = -(L - 1); lag <= L - 1; ++lag) {
      double a = 0.0;
      for (int i = 0; i < L; ++i) {
        const int j = i + lag;
        if (j >= 0 && j < L) a += t[static_cast<std::size_t>(j)] * t[static_cast<std::size_t>(i)];
      }
      acc += a * std::cos(2.0 * kPi * static_cast<double>(k) * lag / length);
    }
    g(k) = acc / energy;
  }
  return g;
}

ComplexVec pi2bpsk_reference(int length, SeededRng& rng, std::size_t first_index) {
  const BitVec bits = rng.bits(static_cast<std::size_t>(length));
  return modulate(bits, Modulation::Pi2Bpsk, first_index);
}

int round_even(double x) { return 2 * static_cast<int>(std::lround(x / 2.0)); }

int gamma_for_extension(int M, double extension_pct) {
  return static_cast<int>(std::lround(extension_pct * M / 200.0));
}

}  // namespace otfdm
