#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "otfdm/numerics.hpp"
#include "otfdm/types.hpp"

namespace otfdm {

enum class Modulation { Pi2Bpsk, Qpsk, Qam16, Qam64, Qam256 };

int bits_per_symbol(Modulation m);
std::string_view to_string(Modulation m);
Modulation parse_modulation(std::string_view name);
inline constexpr Modulation kAllModulations[] = {Modulation::Pi2Bpsk, Modulation::Qpsk, Modulation::Qam16,
                                                 Modulation::Qam64, Modulation::Qam256};

/// Gray-mapped, unit-average-power constellation (3GPP bit ordering).
/// Entry i is the point for the bit pattern whose first bit is the MSB of i.
/// For Pi2Bpsk this is the unrotated BPSK pair (1+j)/sqrt2, -(1+j)/sqrt2.
ComplexVec constellation(Modulation m);

/// Maps bits to symbols. For Pi2Bpsk, symbol n is rotated by e^{j pi/2 ((first_index + n) mod 2)},
/// so callers placing the output at an offset inside a larger block keep the 90 degree alternation.
ComplexVec modulate(std::span<const std::uint8_t> bits, Modulation m, std::size_t first_index = 0);

/// r(n) = exp(-j pi root n (n+1) / length). Requires gcd(root, length) == 1.
ComplexVec zadoff_chu(int root, int length);

/// ZC of the largest prime <= length, cyclically extended to `length`.
ComplexVec zc_reference(int length, int root = 1);

enum class LayoutVariant { TwoSided, OneSidedCp };

/// Sample layout of one multiplexed symbol: [CP | RS core | CS | data | ARS].
struct FrameLayout {
  int l_r = 0;
  int l_cp = 0;
  int l_cs = 0;
  int l_d = 0;
  int l_ars = 0;
  LayoutVariant variant = LayoutVariant::TwoSided;

  int l_rs() const { return l_cp + l_r + l_cs; }
  int size() const { return l_rs() + l_d + l_ars; }
  int data_begin() const { return l_rs(); }
  int ars_begin() const { return l_rs() + l_d; }
  int core_begin() const { return l_cp; }

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;

  static FrameLayout two_sided(int l_r, int l_cp, int l_cs, int l_d, int l_ars = 0);
  /// CP equal to the RS core, no CS.
  static FrameLayout one_sided(int l_r, int l_d, int l_ars = 0);
};

/// [last l_cp of core | core | first l_cs of core]; [core | core] for OneSidedCp.
ComplexVec build_rs_block(const ComplexVec& rs_core, const FrameLayout& layout);

enum class FilterKind { Sqrc, Taps };

/// Real non-negative per-subcarrier gains on the extended grid k' in [-gamma, M+gamma-1].
struct ShapingFilter {
  RealVec weights;  // weights(i) is w_f(i - gamma)
  int M = 0;
  int gamma = 0;
  FilterKind kind = FilterKind::Sqrc;
  std::vector<double> taps;  // TAPS only, as given (unnormalized)

  int extended_size() const { return M + 2 * gamma; }
  /// w_f(k'); zero outside the extended grid.
  double weight(int k_ext) const;
  /// Extension factor 2 gamma / M in percent.
  double extension_pct() const { return M > 0 ? 200.0 * gamma / M : 0.0; }
};

/// Square-root raised cosine, rolloff over 2 gamma subcarriers per edge. gamma <= M/2.
ShapingFilter make_sqrc_filter(int M, int gamma);
/// All-ones filter over the M allocated subcarriers.
inline ShapingFilter make_unity_filter(int M) { return make_sqrc_filter(M, 0); }

/// Magnitude response of a 2- or 3-tap FIR on the M-point grid, scaled to mean |w|^2 = 1.
ShapingFilter make_taps_filter(std::span<const double> taps, int M);

/// Fold sum over p of |w_f(k + pM)|^2 for k in [0, M), i.e. over all k' congruent to k.
/// Equals 1 for fold-flat filters.
RealVec fold_power(const ShapingFilter& filter);

/// Spectrum of the end-to-end tap-filter response |W|^2 evaluated on a `length`-point grid.
/// The response is the autocorrelation of the normalized taps, so it is exact on any grid.
/// For SQRC filters this returns all ones (the shaping is left inside the composite channel).
ComplexVec taps_reference_response(const ShapingFilter& filter, int length);

/// pi/2-BPSK reference of given length from seeded random bits.
ComplexVec pi2bpsk_reference(int length, SeededRng& rng, std::size_t first_index);

/// Percent -> integer count rounded to the nearest even number.
int round_even(double x);

/// Gamma for an extension factor in percent: 2 gamma / M = pct / 100, rounded to nearest.
int gamma_for_extension(int M, double extension_pct);

}  // namespace otfdm
