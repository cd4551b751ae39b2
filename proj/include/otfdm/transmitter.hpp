#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "otfdm/numerics.hpp"
#include "otfdm/sequences.hpp"
#include "otfdm/types.hpp"

namespace otfdm {

/// OFDM numerology carrying one OTFDM symbol.
struct WaveformGrid {
  int M = 0;          // allocation before extension
  int gamma = 0;      // excess subcarriers per side
  int N = 0;          // IFFT size
  int n_cp = 0;       // symbol-level cyclic prefix, samples
  double scs_khz = 30.0;
  std::optional<int> start_sc;  // first mapped subcarrier; default -(M/2 + gamma)

  int allocation() const { return M + 2 * gamma; }
  int first_subcarrier() const { return start_sc.value_or(-(M / 2 + gamma)); }
  int symbol_length() const { return N + n_cp; }
  double sample_rate_hz() const { return N * scs_khz * 1e3; }
  /// Transmit scaling so the mean time-sample power is 1 for unit-power symbols.
  double power_scale() const { return static_cast<double>(N) / M; }
  void validate() const;
};

/// Grid with N = next_pow2(oversampling * (M + 2 gamma)) and an NR-normal CP fraction (144/2048).
WaveformGrid make_grid(int M, int gamma, double scs_khz = 30.0, int oversampling = 4);

struct ReferenceSignals {
  ComplexVec rs_core;  // l_r samples
  ComplexVec ars;      // l_ars samples
};

/// One generated symbol plus the unnormalized intermediate signals.
struct OtfdmSymbol {
  ComplexVec time_samples;  // N + n_cp, CP first
  ComplexVec x_t;           // multiplexed [RS block | data | ARS], length M
  ComplexVec x_f;           // M-point DFT of x_t
  ComplexVec x_e;           // cyclic extension, length M + 2 gamma
  ComplexVec x_s;           // shaped extension
  ComplexVec x_m;           // N subcarriers in FFT bin order (bin k mod N)
  ComplexVec data;          // modulated data symbols
  ReferenceSignals refs;
};

/// [rs_block | data | ars]; lengths must match the layout.
ComplexVec multiplex_symbol(const ComplexVec& data, const ComplexVec& rs_block, const ComplexVec& ars,
                            const FrameLayout& layout);

/// x_s(k') = w_f(k') x_f(k' mod M) for k' in [-gamma, M+gamma). Output index i is k' = i - gamma.
ComplexVec precode_extend_shape(const ComplexVec& x_t, const ShapingFilter& filter);

struct ShapedSpectrum {
  ComplexVec x_f, x_e, x_s;
};
/// precode_extend_shape keeping the intermediate x_f and x_e.
ShapedSpectrum precode_stages(const ComplexVec& x_t, const ShapingFilter& filter);

/// Subcarrier mapping, N-point inverse transform, power scaling and CP insertion.
OtfdmSymbol map_and_modulate(const ComplexVec& x_s, const WaveformGrid& grid);

/// End-to-end (shaping x matched filter) pulse on the N-sample grid.
/// Index i holds lag i - N/2, normalized so the lag-0 value is 1.
ComplexVec effective_pulse(const ShapingFilter& filter, const WaveformGrid& grid);

/// Energy fraction of the effective pulse beyond +-K symbol periods (K N / M samples).
double pulse_tail_fraction(const ComplexVec& pulse, const WaveformGrid& grid, double symbol_periods);

/// ZC (or pi/2-BPSK for Pi2Bpsk data) RS core and ARS for a layout.
ReferenceSignals make_reference_signals(Modulation scheme, const FrameLayout& layout, SeededRng& rng);

/// bits -> modulate -> RS block -> multiplex -> precode/extend/shape -> map/IFFT/CP.
/// `bits` must hold l_d * bits_per_symbol(scheme) bits; rng only feeds pi/2-BPSK reference bits.
OtfdmSymbol generate_otfdm(std::span<const std::uint8_t> bits, Modulation scheme, const FrameLayout& layout,
                           const ShapingFilter& filter, const WaveformGrid& grid, SeededRng& rng);

/// Generation with caller-supplied data symbols and references (no bit mapping).
OtfdmSymbol generate_from_symbols(const ComplexVec& data, const ReferenceSignals& refs, const FrameLayout& layout,
                                  const ShapingFilter& filter, const WaveformGrid& grid);

/// Interleaved little-endian float64 I/Q at `path` plus a key=value text header at `path` + ".hdr".
void write_waveform(const std::filesystem::path& path, const ComplexVec& samples,
                    const std::map<std::string, std::string>& header);
ComplexVec read_waveform(const std::filesystem::path& path);
std::map<std::string, std::string> read_waveform_header(const std::filesystem::path& path);

}  // namespace otfdm
