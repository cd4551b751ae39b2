#pragma once

#include <iosfwd>

#include "otfdm/numerics.hpp"
#include "otfdm/sequences.hpp"
#include "otfdm/transmitter.hpp"
#include "otfdm/types.hpp"

namespace otfdm {

/// CP removal, N-point forward transform scaled by M/N, and extraction of the mapped window.
/// Loopback of map_and_modulate returns x_s exactly.
ComplexVec front_end(const ComplexVec& rx, const WaveformGrid& grid);

struct FoldedSymbol {
  ComplexVec y_f;         // M folded subcarriers
  ComplexVec y_s;         // M + 2 gamma demapped subcarriers
  ShapingFilter filter;   // filter used for matched filtering
};

/// Matched filter and fold: y_f(k) = sum over k' congruent to k mod M of w_f(k') y_s(k').
FoldedSymbol fold_spectrum(const ComplexVec& y_s, const ShapingFilter& filter);

/// Folded end-to-end response sum_{k' = k mod M} w_f(k')^2 h_s(k') of a channel response h_s on the extended grid.
ComplexVec fold_composite(const ComplexVec& h_s, const ShapingFilter& filter);

struct EstimatorConfig {
  int window_len = 1;     // l_n, taps kept from the start of the impulse response
  double lambda = 0.0;    // relative to the mean reference power
  int precursor = 2;      // taps kept before lag 0 for fractional-delay leakage
  int rs_offset = -1;     // one-sided layouts: samples before the core where extraction starts (-1: l_r / 4)

  void validate(const FrameLayout& layout) const;
};

struct ChannelEstimate {
  ComplexVec h_hat_f;  // M
  ComplexVec h_f_rs;   // l_r LS estimate
  ComplexVec h_t_rs;   // l_r impulse response
  ComplexVec h_w_rs;   // windowed impulse response, zero-padded to M
};

/// Windowed (regularized) LS estimate of the folded composite channel from the RS inside the symbol.
/// h = Y R* / (|R|^2 + lambda mean|R|^2). Throws SingularReference if lambda = 0 and R has a zero bin.
ChannelEstimate estimate_channel(const FoldedSymbol& folded, const FrameLayout& layout, const ComplexVec& rs_core,
                                 const EstimatorConfig& cfg);

struct EqualizedSymbol {
  ComplexVec x_hat_f;
  ComplexVec x_hat_t;
  ComplexVec rs_cp, rs_core, rs_cs, data, ars;
  double theta_hat = 0.0;
  /// mean |h|^2 / (|h|^2 + s2): gain of the biased MMSE output.
  double bias = 1.0;
};

/// x_hat_f = conj(h) y_f / (|h|^2 + noise_var), then M-point inverse and split per layout.
/// noise_var is relative to unit symbol power (1 / SNR).
EqualizedSymbol mmse_equalize(const FoldedSymbol& folded, const ChannelEstimate& est, double noise_var,
                              const FrameLayout& layout);

/// Sample offset of data index n (or ARS index n) from the end of the RS core is n + l_cs (n + l_cs + l_d).
/// theta_hat = mean of angle(a_hat conj(a)) / offset; data rotated by exp(-j (n + l_cs) theta_hat).
EqualizedSymbol ars_phase_correct(const EqualizedSymbol& eq, const ComplexVec& ars_ref, const FrameLayout& layout);

struct Demodulated {
  BitVec bits;
  std::vector<double> llr;  // max-log, positive favours bit 0
};

/// Minimum-distance hard bits and max-log soft metrics. first_index aligns the pi/2-BPSK rotation.
Demodulated demodulate(const ComplexVec& symbols, Modulation scheme, double noise_var, std::size_t first_index = 0);

/// Text dump of y_s, y_f, h_hat_f and the equalized segments.
void dump_receiver(std::ostream& os, const FoldedSymbol& folded, const ChannelEstimate& est,
                   const EqualizedSymbol& eq);

}  // namespace otfdm
