#include "otfdm/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

namespace otfdm {

std::string_view to_string(ChannelModel m) {
  switch (m) {
    case ChannelModel::Flat: return "FLAT";
    case ChannelModel::Tdlc: return "TDLC";
    case ChannelModel::Hst: return "HST";
    case ChannelModel::Custom: return "CUSTOM";
  }
  return "UNKNOWN";
}

Complex ChannelTap::gain_at(Eigen::Index n) const {
  if (gain.size() == 1) return gain(0);
  return gain(std::clamp<Eigen::Index>(n, 0, gain.size() - 1));
}

double ChannelTap::mean_power() const { return gain.cwiseAbs2().mean(); }

double ChannelRealization::max_delay() const {
  double d = 0.0;
  for (const auto& t : taps) d = std::max(d, t.delay_samples);
  return d;
}

void ChannelRealization::validate() const {
  if (taps.empty()) throw InvalidArgument("ChannelRealization: no taps");
  if (!(noise_variance >= 0.0)) throw InvalidArgument("ChannelRealization: negative noise variance");
  for (const auto& t : taps) {
    if (!(t.delay_samples >= 0.0) || !std::isfinite(t.delay_samples)) {
      throw InvalidArgument("ChannelRealization: delays must be finite and >= 0");
    }
    if (t.gain.size() == 0 || !all_finite(t.gain)) throw InvalidArgument("ChannelRealization: bad gain trajectory");
  }
}

void HstConfig::validate() const {
  if (!(ds_m > 0.0 && dmin_m > 0.0 && speed_kmh > 0.0 && fc_ghz > 0.0)) {
    throw InvalidArgument("HstConfig: all parameters must be positive");
  }
}

double max_doppler_hz(double speed_kmh, double fc_ghz) { return speed_kmh / 3.6 / kSpeedOfLight * fc_ghz * 1e9; }

double hst_cos_theta(const HstConfig& cfg, double t_s) {
  const double v = cfg.speed_kmh / 3.6;
  const double period = 2.0 * cfg.ds_m / v;
  double t = std::fmod(t_s, period);
  if (t < 0.0) t += period;
  const double x = t <= cfg.ds_m / v ? cfg.ds_m / 2.0 - v * t : -1.5 * cfg.ds_m + v * t;
  return x / std::sqrt(cfg.dmin_m * cfg.dmin_m + x * x);
}

ChannelRealization flat_channel(Complex gain, double noise_variance) {
  return static_channel({{0.0, gain}}, noise_variance);
}

ChannelRealization static_channel(const std::vector<std::pair<double, Complex>>& taps, double noise_variance) {
  ChannelRealization ch;
  ch.model = taps.size() == 1 && taps[0].first == 0.0 ? ChannelModel::Flat : ChannelModel::Custom;
  ch.noise_variance = noise_variance;
  for (const auto& [d, g] : taps) ch.taps.push_back({d, ComplexVec::Constant(1, g)});
  ch.validate();
  return ch;
}

const std::vector<std::pair<double, double>>& tdlc_profile() {
  // TR 38.901 Table 7.7.2-3 (TDL-C), normalized delays and powers in dB.
  static const std::vector<std::pair<double, double>> table = {
      {0.0, -4.4},     {0.2099, -1.2},  {0.2219, -3.5},  {0.2329, -5.2},  {0.2176, -2.5},  {0.6366, 0.0},
      {0.6448, -2.2},  {0.6560, -3.9},  {0.6584, -7.4},  {0.7935, -7.1},  {0.8213, -10.7}, {0.9336, -11.1},
      {1.2285, -5.1},  {1.3083, -6.8},  {2.1704, -8.7},  {2.7105, -13.2}, {4.2589, -13.9}, {4.6003, -13.9},
      {5.4902, -15.8}, {5.6077, -17.1}, {6.3065, -16.0}, {6.6374, -15.7}, {7.0427, -21.6}, {8.6523, -22.8}};
  return table;
}

namespace {
constexpr int kSinusoids = 32;

ComplexVec rayleigh_trajectory(double power, double fd_hz, double sample_rate_hz, Eigen::Index num_samples,
                               SeededRng& rng) {
  std::array<double, kSinusoids> freq{}, phase{};
  for (int s = 0; s < kSinusoids; ++s) {
    freq[s] = fd_hz * std::cos(2.0 * kPi * rng.uniform());
    phase[s] = 2.0 * kPi * rng.uniform();
  }
  const double scale = std::sqrt(power / kSinusoids);
  const Eigen::Index len = fd_hz == 0.0 ? 1 : num_samples;
  ComplexVec g(len);
  for (Eigen::Index n = 0; n < len; ++n) {
    const double t = static_cast<double>(n) / sample_rate_hz;
    Complex acc = 0.0;
    for (int s = 0; s < kSinusoids; ++s) acc += std::polar(1.0, 2.0 * kPi * freq[s] * t + phase[s]);
    g(n) = scale * acc;
  }
  return g;
}
}  // namespace

ChannelRealization tdlc_realization(double delay_spread_ns, double speed_kmh, double fc_ghz, double sample_rate_hz,
                                    Eigen::Index num_samples, SeededRng& rng) {
  if (!(delay_spread_ns > 0.0)) throw InvalidArgument("tdlc_realization: delay spread must be positive");
  if (!(sample_rate_hz > 0.0) || num_samples < 1) throw InvalidArgument("tdlc_realization: bad sampling");
  if (speed_kmh < 0.0 || !(fc_ghz > 0.0)) throw InvalidArgument("tdlc_realization: bad speed or carrier");
  const auto& table = tdlc_profile();
  const double max_norm = table.back().first;
  double total = 0.0;
  for (const auto& row : table) total += db_to_linear(row.second);

  const double fd = max_doppler_hz(speed_kmh, fc_ghz);
  ChannelRealization ch;
  ch.model = ChannelModel::Tdlc;
  ch.sample_rate_hz = sample_rate_hz;
  for (const auto& [tau, p_db] : table) {
    const double delay = tau / max_norm * delay_spread_ns * 1e-9 * sample_rate_hz;
    ch.taps.push_back({delay, rayleigh_trajectory(db_to_linear(p_db) / total, fd, sample_rate_hz, num_samples, rng)});
  }
  ch.validate();
  return ch;
}

ChannelRealization hst_realization(const HstConfig& cfg, double t0_s, double duration_s, double sample_rate_hz) {
  cfg.validate();
  if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0)) throw InvalidArgument("hst_realization: bad duration or rate");
  const auto n = static_cast<Eigen::Index>(std::ceil(duration_s * sample_rate_hz));
  const double fd = max_doppler_hz(cfg.speed_kmh, cfg.fc_ghz);
  const double dt = 1.0 / sample_rate_hz;
  ComplexVec g(n);
  double phase = 0.0;
  double prev = fd * hst_cos_theta(cfg, t0_s);
  g(0) = 1.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double cur = fd * hst_cos_theta(cfg, t0_s + static_cast<double>(i) * dt);
    phase += kPi * (prev + cur) * dt;
    prev = cur;
    g(i) = std::polar(1.0, phase);
  }
  ChannelRealization ch;
  ch.model = ChannelModel::Hst;
  ch.sample_rate_hz = sample_rate_hz;
  ch.t0_s = t0_s;
  ch.taps.push_back({0.0, std::move(g)});
  return ch;
}

double noise_variance_for_snr(double snr_db, const WaveformGrid& grid) {
  return static_cast<double>(grid.N) / (grid.M * db_to_linear(snr_db));
}

std::pair<int, RealVec> delay_kernel(double delay_samples) {
  constexpr int kHalf = 16;
  const double r = std::round(delay_samples);
  if (std::abs(delay_samples - r) < 1e-12) return {static_cast<int>(r), RealVec::Ones(1)};
  const int first = static_cast<int>(std::floor(delay_samples)) - kHalf + 1;
  RealVec h(2 * kHalf);
  for (int i = 0; i < 2 * kHalf; ++i) {
    const double x = (first + i) - delay_samples;
    const double sinc = std::sin(kPi * x) / (kPi * x);
    const double u = x / kHalf;
    const double win = std::abs(u) >= 1.0 ? 0.0 : 0.42 + 0.5 * std::cos(kPi * u) + 0.08 * std::cos(2.0 * kPi * u);
    h(i) = sinc * win;
  }
  h /= h.sum();
  return {first, h};
}

ComplexVec apply_channel(const ComplexVec& signal, const ChannelRealization& ch, SeededRng& rng) {
  if (signal.size() == 0) throw InvalidArgument("apply_channel: empty signal");
  ch.validate();
  const Eigen::Index len = signal.size();
  const Eigen::Index out_len = len + static_cast<Eigen::Index>(std::ceil(ch.max_delay() - 1e-12));
  ComplexVec out = ComplexVec::Zero(out_len);
  for (const auto& tap : ch.taps) {
    const auto [first, h] = delay_kernel(tap.delay_samples);
    for (Eigen::Index n = 0; n < out_len; ++n) {
      Complex acc = 0.0;
      for (Eigen::Index i = 0; i < h.size(); ++i) {
        const Eigen::Index src = n - first - i;
        if (src >= 0 && src < len) acc += h(i) * signal(src);
      }
      out(n) += tap.gain_at(n) * acc;
    }
  }
  if (ch.noise_variance > 0.0) out += rng.complex_noise(out_len, ch.noise_variance);
  return out;
}

ComplexVec channel_frequency_response(const ChannelRealization& ch, const WaveformGrid& grid) {
  ch.validate();
  grid.validate();
  ComplexVec H = ComplexVec::Zero(grid.allocation());
  const int first_sc = grid.first_subcarrier();
  for (const auto& tap : ch.taps) {
    Complex g = 0.0;
    if (tap.gain.size() == 1) {
      g = tap.gain(0);
    } else {
      for (int n = 0; n < grid.N; ++n) g += tap.gain_at(grid.n_cp + n);
      g /= static_cast<double>(grid.N);
    }
    const auto [first, h] = delay_kernel(tap.delay_samples);
    for (int i = 0; i < grid.allocation(); ++i) {
      const double k = first_sc + i;
      Complex acc = 0.0;
      for (Eigen::Index m = 0; m < h.size(); ++m) {
        acc += h(m) * std::polar(1.0, -2.0 * kPi * k * static_cast<double>(first + m) / grid.N);
      }
      H(i) += g * acc;
    }
  }
  return H;
}

void dump_channel(std::ostream& os, const ChannelRealization& ch, Eigen::Index stride) {
  stride = std::max<Eigen::Index>(stride, 1);
  os << "model: " << to_string(ch.model) << "\n";
  os << "sample_rate_hz: " << ch.sample_rate_hz << "\n";
  os << "noise_variance: " << ch.noise_variance << "\n";
  os << "t0_s: " << ch.t0_s << "\n";
  os << "taps:\n";
  for (std::size_t i = 0; i < ch.taps.size(); ++i) {
    const auto& t = ch.taps[i];
    os << "  - index: " << i << "\n";
    os << "    delay_samples: " << t.delay_samples << "\n";
    os << "    mean_power: " << t.mean_power() << "\n";
    os << "    gain:\n";
    for (Eigen::Index n = 0; n < t.gain.size(); n += stride) {
      os << "      - [" << n << ", " << t.gain(n).real() << ", " << t.gain(n).imag() << "]\n";
    }
  }
}

}  // namespace otfdm
