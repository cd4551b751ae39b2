#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "otfdm/numerics.hpp"
#include "otfdm/transmitter.hpp"
#include "otfdm/types.hpp"

namespace otfdm {

enum class ChannelModel { Flat, Tdlc, Hst, Custom };

std::string_view to_string(ChannelModel m);

/// One propagation path: a (possibly fractional) delay and a complex gain per output sample.
/// A gain vector of length 1 means the path is static.
struct ChannelTap {
  double delay_samples = 0.0;
  ComplexVec gain;

  Complex gain_at(Eigen::Index n) const;
  double mean_power() const;
};

struct ChannelRealization {
  std::vector<ChannelTap> taps;
  double noise_variance = 0.0;
  ChannelModel model = ChannelModel::Custom;
  double sample_rate_hz = 0.0;
  double t0_s = 0.0;

  double max_delay() const;
  /// Throws InvalidArgument on negative delays, empty tap set or non-finite gains.
  void validate() const;
};

struct HstConfig {
  double ds_m = 300.0;
  double dmin_m = 2.0;
  double speed_kmh = 500.0;
  double fc_ghz = 7.0;

  void validate() const;
};

/// v fc / c.
double max_doppler_hz(double speed_kmh, double fc_ghz);

/// cos(theta) of the straight-track geometry at time t, periodic over 2 Ds / v.
double hst_cos_theta(const HstConfig& cfg, double t_s);

/// Static single tap.
ChannelRealization flat_channel(Complex gain = 1.0, double noise_variance = 0.0);

/// Static taps given as (delay in samples, gain) pairs.
ChannelRealization static_channel(const std::vector<std::pair<double, Complex>>& taps, double noise_variance = 0.0);

/// Normalized TDL-C profile as (delay, power dB) rows; delays in units of the nominal delay spread.
const std::vector<std::pair<double, double>>& tdlc_profile();

/// TDL-C taps scaled so the last tap sits at delay_spread_ns, with Rayleigh fading
/// (32-sinusoid sum, classical Doppler at v fc / c) evaluated for num_samples output samples.
ChannelRealization tdlc_realization(double delay_spread_ns, double speed_kmh, double fc_ghz, double sample_rate_hz,
                                    Eigen::Index num_samples, SeededRng& rng);

/// Single unit-gain path with phase 2 pi integral of f_dmax cos(theta(t)) starting at t0.
ChannelRealization hst_realization(const HstConfig& cfg, double t0_s, double duration_s, double sample_rate_hz);

/// Noise variance per time sample giving `snr_db` per data symbol on `grid`
/// (unit mean transmit power, unit-power channel).
double noise_variance_for_snr(double snr_db, const WaveformGrid& grid);

/// Time-varying linear convolution plus complex AWGN of variance ch.noise_variance.
/// Output length is signal length + ceil(max delay).
ComplexVec apply_channel(const ComplexVec& signal, const ChannelRealization& ch, SeededRng& rng);

/// Interpolation kernel realizing a delay: (first offset, taps). Integer delays give one exact tap.
std::pair<int, RealVec> delay_kernel(double delay_samples);

/// Channel response at the M + 2 gamma mapped subcarriers, using each path's mean gain over
/// the FFT window of the first symbol (samples [n_cp, n_cp + N)).
ComplexVec channel_frequency_response(const ChannelRealization& ch, const WaveformGrid& grid);

/// Structured text dump of taps and gain trajectories.
void dump_channel(std::ostream& os, const ChannelRealization& ch, Eigen::Index stride = 1);

}  // namespace otfdm
