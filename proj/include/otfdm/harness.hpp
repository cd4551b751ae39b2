#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "otfdm/channel.hpp"
#include "otfdm/numerics.hpp"
#include "otfdm/receiver.hpp"
#include "otfdm/sequences.hpp"
#include "otfdm/transmitter.hpp"

namespace otfdm {

/// One row of the modulation-specific RS table, lengths at M = 3120.
struct SchemeLayoutRow {
  Modulation scheme;
  int l_r, l_cp, l_cs, l_n;
  double extension_pct;
  double printed_overhead_pct;
};

inline constexpr int kSchemeLayoutM = 3120;
const std::vector<SchemeLayoutRow>& scheme_layout_rows();
const SchemeLayoutRow& scheme_layout_row(Modulation scheme);

enum class LayoutMode { PerScheme, Overhead, Explicit };

struct LayoutSpec {
  LayoutMode mode = LayoutMode::Overhead;
  double rs_overhead_pct = 8.0;  // Overhead mode
  double ars_pct = 0.0;          // ARS length as percent of M, rounded to even
  LayoutVariant variant = LayoutVariant::TwoSided;
  FrameLayout explicit_layout;   // Explicit mode; l_d is recomputed from M
  int explicit_window = 0;
};

struct FilterSpec {
  FilterKind kind = FilterKind::Sqrc;
  double extension_pct = 0.0;
  std::vector<double> taps;
};

struct ChannelSpec {
  ChannelModel model = ChannelModel::Flat;
  double delay_spread_ns = 1000.0;
  double speed_kmh = 0.0;
  double fc_ghz = 7.0;
  double ds_m = 300.0;
  double dmin_m = 2.0;
};

struct ExperimentConfig {
  std::string metric = "ber";
  Modulation scheme = Modulation::Qpsk;
  int M = 240;
  double scs_khz = 30.0;
  int oversampling = 4;
  FilterSpec filter;
  LayoutSpec layout;
  EstimatorConfig estimator{0, 0.0, 2, -1};  // window_len 0: layout default
  bool lambda_tracks_snr = false;             // lambda = 1 / SNR at each SNR point
  ChannelSpec channel;
  std::vector<double> snr_db{30.0};
  int trials = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
  bool genie = false;
  double pulse_k = 4.0;

  void validate() const;
};

struct ResolvedLayout {
  FrameLayout layout;
  int window_len;
};

/// Per-scheme reference lengths scaled by M / 3120 and rounded to even (l_r >= 2, l_n clamped to [1, l_r]).
ResolvedLayout scheme_layout(Modulation scheme, int M, double ars_pct = 0.0);
/// l_RS = round_even(pct M / 100) split as l_r = round_even(l_RS / 2), l_cp = round_even(3 l_RS / 8), l_cs the rest.
/// Window defaults to l_cp.
ResolvedLayout overhead_layout(double rs_overhead_pct, int M, double ars_pct = 0.0,
                               LayoutVariant variant = LayoutVariant::TwoSided);
ResolvedLayout resolve_layout(const ExperimentConfig& cfg);
ShapingFilter resolve_filter(const ExperimentConfig& cfg);
WaveformGrid resolve_grid(const ExperimentConfig& cfg);
/// Extension factor actually realized by the integer gamma, in percent.
double realized_extension_pct(const ExperimentConfig& cfg);
/// Total overhead: RS block (and ARS) share of M plus the extension factor, percent.
double total_overhead_pct(const FrameLayout& layout, double extension_pct);

struct MetricRecord {
  std::string metric;
  std::string scheme;
  double gamma_pct = 0.0;
  double rs_overhead_pct = 0.0;
  double scs_khz = 0.0;
  double speed_kmh = 0.0;
  std::optional<double> snr_db;
  double value = 0.0;
  long long trials = 0;
  std::uint64_t seed = 0;
  bool warning = false;
  std::string note;
};

/// Runs fn(trial, rng) for trial in [0, trials) on `threads` workers, each trial with its own
/// stream SeededRng(seed, stream_base + trial). Results come back in trial order.
template <typename Result>
std::vector<Result> run_trials(int trials, int threads, std::uint64_t seed, std::uint64_t stream_base,
                               const std::function<Result(int, SeededRng&)>& fn);

struct PaprResult {
  std::vector<MetricRecord> records;
  std::vector<CcdfPoint> otfdm_curve, baseline_curve;  // per-sample statistic
};

/// Per-sample (instantaneous power over mean power) and per-symbol PAPR at the 1% CCDF point for OTFDM
/// and a DFT-s-OFDM symbol carrying all M data (gamma = 0, unity filter, same N), plus gains.
PaprResult run_papr(const ExperimentConfig& cfg);

/// Channel-estimate MSE against the folded composite response of the known realization.
std::vector<MetricRecord> run_mse(const ExperimentConfig& cfg);

/// Uncoded BER and EVM per SNR for OTFDM (with and without ARS correction when the layout has ARS)
/// and the two-symbol DFT-s-OFDM baseline on M/2 subcarriers.
std::vector<MetricRecord> run_ber(const ExperimentConfig& cfg, std::ostream* diagnostics = nullptr);

/// Effective-pulse energy fraction beyond +-pulse_k symbol periods.
std::vector<MetricRecord> run_pulse_decay(const ExperimentConfig& cfg);

/// RS (plus ARS) share of the symbol plus extension factor, percent.
std::vector<MetricRecord> run_overhead(const ExperimentConfig& cfg);

/// Dispatches on cfg.metric.
std::vector<MetricRecord> run_metric(const ExperimentConfig& cfg, std::ostream* diagnostics = nullptr);

/// Parses a JSON config. List-valued axes (metric, scheme, extension_pct, rs_overhead_pct,
/// speed_kmh, scs_khz, M) expand to their cartesian product in that nesting order.
std::vector<ExperimentConfig> parse_config(const std::string& json_text);
std::vector<ExperimentConfig> load_config(const std::filesystem::path& path);

inline const char* kCsvHeader = "metric,scheme,gamma_pct,rs_overhead_pct,scs_khz,speed_kmh,snr_db,value,trials,seed";
void write_csv(std::ostream& os, const std::vector<MetricRecord>& records);
void write_csv(const std::filesystem::path& path, const std::vector<MetricRecord>& records);

/// Runs every config in order and writes one CSV.
std::vector<MetricRecord> sweep(const std::vector<ExperimentConfig>& configs, const std::filesystem::path& out);

/// Closed-form Gray 16-QAM bit error rate on AWGN at Es/N0 = snr_linear.
double qam16_ber_theory(double snr_linear);

/// Q(x) = P(N(0,1) > x).
double q_function(double x);

}  // namespace otfdm

#include "otfdm/harness_impl.hpp"
