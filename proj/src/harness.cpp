#include "otfdm/harness.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace otfdm {

const std::vector<SchemeLayoutRow>& scheme_layout_rows() {
  static const std::vector<SchemeLayoutRow> rows = {
      {Modulation::Pi2Bpsk, 72, 56, 18, 36, 0.0, 4.9},  {Modulation::Qpsk, 84, 63, 21, 63, 0.0, 5.4},
      {Modulation::Qam16, 108, 81, 27, 108, 0.0, 7.0},  {Modulation::Qam64, 120, 90, 30, 120, 5.0, 12.7},
      {Modulation::Qam256, 132, 108, 34, 132, 5.0, 13.5}};
  return rows;
}

const SchemeLayoutRow& scheme_layout_row(Modulation scheme) {
  for (const auto& r : scheme_layout_rows()) {
    if (r.scheme == scheme) return r;
  }
  throw InvalidArgument("scheme_layout_row: no row for scheme");
}

namespace {
int ars_length(double ars_pct, int M) { return ars_pct > 0.0 ? std::max(2, round_even(ars_pct * M / 100.0)) : 0; }

ResolvedLayout finish_layout(FrameLayout f, int M, int window) {
  f.l_d = M - f.l_rs() - f.l_ars;
  if (f.l_d < 0) throw InvalidArgument("layout: RS and ARS do not fit in M");
  f.validate();
  return {f, std::clamp(window, 1, f.l_r)};
}
}  // namespace

ResolvedLayout scheme_layout(Modulation scheme, int M, double ars_pct) {
  const auto& row = scheme_layout_row(scheme);
  const double s = static_cast<double>(M) / kSchemeLayoutM;
  FrameLayout f;
  f.l_r = std::max(2, round_even(row.l_r * s));
  f.l_cp = std::min(f.l_r, round_even(row.l_cp * s));
  f.l_cs = std::min(f.l_r, round_even(row.l_cs * s));
  f.l_ars = ars_length(ars_pct, M);
  return finish_layout(f, M, round_even(row.l_n * s));
}

ResolvedLayout overhead_layout(double rs_overhead_pct, int M, double ars_pct, LayoutVariant variant) {
  const int l_rs = std::max(2, round_even(rs_overhead_pct * M / 100.0));
  FrameLayout f;
  f.variant = variant;
  f.l_ars = ars_length(ars_pct, M);
  if (variant == LayoutVariant::OneSidedCp) {
    f.l_r = f.l_cp = l_rs / 2;
    f.l_cs = 0;
    return finish_layout(f, M, f.l_r / 2);
  }
  f.l_r = std::max(2, round_even(l_rs / 2.0));
  f.l_cp = std::min(round_even(3.0 * l_rs / 8.0), l_rs - f.l_r);
  f.l_cs = l_rs - f.l_r - f.l_cp;
  return finish_layout(f, M, f.l_cp);
}

ResolvedLayout resolve_layout(const ExperimentConfig& cfg) {
  ResolvedLayout r{};
  switch (cfg.layout.mode) {
    case LayoutMode::PerScheme: r = scheme_layout(cfg.scheme, cfg.M, cfg.layout.ars_pct); break;
    case LayoutMode::Overhead:
      r = overhead_layout(cfg.layout.rs_overhead_pct, cfg.M, cfg.layout.ars_pct, cfg.layout.variant);
      break;
    case LayoutMode::Explicit: {
      FrameLayout f = cfg.layout.explicit_layout;
      r = finish_layout(f, cfg.M, cfg.layout.explicit_window > 0 ? cfg.layout.explicit_window : f.l_cp);
      break;
    }
  }
  if (cfg.estimator.window_len > 0) r.window_len = std::min(cfg.estimator.window_len, r.layout.l_r);
  return r;
}

ShapingFilter resolve_filter(const ExperimentConfig& cfg) {
  if (cfg.filter.kind == FilterKind::Taps) return make_taps_filter(cfg.filter.taps, cfg.M);
  return make_sqrc_filter(cfg.M, gamma_for_extension(cfg.M, cfg.filter.extension_pct));
}

WaveformGrid resolve_grid(const ExperimentConfig& cfg) {
  const auto f = resolve_filter(cfg);
  return make_grid(cfg.M, f.gamma, cfg.scs_khz, cfg.oversampling);
}

double realized_extension_pct(const ExperimentConfig& cfg) { return resolve_filter(cfg).extension_pct(); }

double total_overhead_pct(const FrameLayout& layout, double extension_pct) {
  return 100.0 * (layout.l_rs() + layout.l_ars) / layout.size() + extension_pct;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> metrics{"papr", "mse", "ber", "pulse", "overhead"};
  if (!metrics.contains(metric)) throw InvalidArgument("config: unknown metric '" + metric + "'");
  if (M < 2) throw InvalidArgument("config: M must be >= 2");
  if (trials < 1) throw InvalidArgument("config: trials must be >= 1");
  if (!(scs_khz > 0.0)) throw InvalidArgument("config: scs_khz must be positive");
  if (oversampling < 1) throw InvalidArgument("config: oversampling must be >= 1");
  if (filter.extension_pct < 0.0 || filter.extension_pct > 100.0) {
    throw InvalidArgument("config: extension_pct outside [0, 100]");
  }
  if (filter.kind == FilterKind::Taps && filter.extension_pct != 0.0) {
    throw InvalidArgument("config: tap filters use no excess bandwidth");
  }
  if (channel.delay_spread_ns <= 0.0 || channel.speed_kmh < 0.0 || channel.fc_ghz <= 0.0) {
    throw InvalidArgument("config: bad channel parameters");
  }
  if (snr_db.empty()) throw InvalidArgument("config: snr_db list is empty");
  const auto rl = resolve_layout(*this);
  EstimatorConfig est = estimator;
  est.window_len = rl.window_len;
  est.validate(rl.layout);
  resolve_grid(*this);
}

namespace {

MetricRecord base_record(const ExperimentConfig& cfg, const std::string& metric, const FrameLayout& layout) {
  MetricRecord r;
  r.metric = metric;
  r.scheme = std::string(to_string(cfg.scheme));
  r.gamma_pct = cfg.filter.extension_pct;
  r.rs_overhead_pct = 100.0 * layout.l_rs() / layout.size();
  r.scs_khz = cfg.scs_khz;
  r.speed_kmh = cfg.channel.model == ChannelModel::Flat ? 0.0 : cfg.channel.speed_kmh;
  r.trials = cfg.trials;
  r.seed = cfg.seed;
  return r;
}

// Stream ranges keep the OTFDM and baseline draws of different metrics apart.
constexpr std::uint64_t kPaprStream = 0;
constexpr std::uint64_t kMseStream = 1ULL << 32;
constexpr std::uint64_t kBerStream = 2ULL << 32;
constexpr int kPaprChunk = 256;

struct PaprChunk {
  DbHistogram otfdm, base;
  double otfdm_power = 0.0, base_power = 0.0;
  std::vector<double> otfdm_sym, base_sym;
};

void add_samples(DbHistogram& h, double& power_sum, std::vector<double>& per_symbol, const ComplexVec& body) {
  const RealVec p = body.cwiseAbs2();
  for (Eigen::Index i = 0; i < p.size(); ++i) h.add(p(i) > 0.0 ? linear_to_db(p(i)) : -1e300);
  power_sum += p.sum();
  per_symbol.push_back(linear_to_db(p.maxCoeff() / p.mean()));
}

ComplexVec symbol_body(const OtfdmSymbol& s, const WaveformGrid& g) { return s.time_samples.tail(g.N); }

}  // namespace

PaprResult run_papr(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto rl = resolve_layout(cfg);
  const auto filter = resolve_filter(cfg);
  const auto grid = resolve_grid(cfg);
  WaveformGrid base_grid = grid;
  base_grid.gamma = 0;
  base_grid.start_sc.reset();
  const auto base_filter = make_unity_filter(cfg.M);
  const FrameLayout base_layout = FrameLayout::two_sided(cfg.M, 0, 0, 0);  // all-data symbol via the RS slot
  const int bps = bits_per_symbol(cfg.scheme);

  const int chunks = (cfg.trials + kPaprChunk - 1) / kPaprChunk;
  std::function<PaprChunk(int, SeededRng&)> chunk_fn = [&](int c, SeededRng&) {
    PaprChunk out;
    const int begin = c * kPaprChunk;
    const int end = std::min(cfg.trials, begin + kPaprChunk);
    for (int t = begin; t < end; ++t) {
      SeededRng rng(cfg.seed, kPaprStream + static_cast<std::uint64_t>(t));
      const BitVec bits = rng.bits(static_cast<std::size_t>(rl.layout.l_d * bps));
      const auto sym = generate_otfdm(bits, cfg.scheme, rl.layout, filter, grid, rng);
      add_samples(out.otfdm, out.otfdm_power, out.otfdm_sym, symbol_body(sym, grid));

      const BitVec base_bits = rng.bits(static_cast<std::size_t>(cfg.M * bps));
      ReferenceSignals refs;
      refs.rs_core = modulate(base_bits, cfg.scheme, 0);
      const auto base = generate_from_symbols(ComplexVec(0), refs, base_layout, base_filter, base_grid);
      add_samples(out.base, out.base_power, out.base_sym, symbol_body(base, base_grid));
    }
    return out;
  };
  auto parts = run_trials<PaprChunk>(chunks, cfg.threads, cfg.seed, 0, chunk_fn);

  PaprChunk total;
  for (auto& p : parts) {
    total.otfdm.merge(p.otfdm);
    total.base.merge(p.base);
    total.otfdm_power += p.otfdm_power;
    total.base_power += p.base_power;
    total.otfdm_sym.insert(total.otfdm_sym.end(), p.otfdm_sym.begin(), p.otfdm_sym.end());
    total.base_sym.insert(total.base_sym.end(), p.base_sym.begin(), p.base_sym.end());
  }
  // Histograms hold raw power in dB; shift by the mean power over all samples.
  const double otfdm_mean_db = linear_to_db(total.otfdm_power / static_cast<double>(total.otfdm.count()));
  const double base_mean_db = linear_to_db(total.base_power / static_cast<double>(total.base.count()));
  const double p_otfdm = total.otfdm.threshold(0.01) - otfdm_mean_db;
  const double p_base = total.base.threshold(0.01) - base_mean_db;
  const double s_otfdm = ccdf_threshold(total.otfdm_sym, 0.01);
  const double s_base = ccdf_threshold(total.base_sym, 0.01);

  PaprResult res;
  const bool few = cfg.trials < 10000;
  auto rec = [&](const char* name, double v) {
    MetricRecord r = base_record(cfg, name, rl.layout);
    r.value = v;
    r.warning = few;
    if (few) r.note = "fewer than 1e4 symbols for a 1% CCDF point";
    res.records.push_back(r);
  };
  rec("papr_otfdm_db", p_otfdm);
  rec("papr_dfts_db", p_base);
  rec("papr_gain_db", p_base - p_otfdm);
  rec("papr_symbol_otfdm_db", s_otfdm);
  rec("papr_symbol_dfts_db", s_base);
  rec("papr_symbol_gain_db", s_base - s_otfdm);

  std::vector<double> grid_db;
  for (double t = 0.0; t <= 12.0 + 1e-9; t += 0.1) grid_db.push_back(t);
  for (double t : grid_db) {
    res.otfdm_curve.push_back({t, total.otfdm.exceedance(t + otfdm_mean_db)});
    res.baseline_curve.push_back({t, total.base.exceedance(t + base_mean_db)});
  }
  return res;
}

namespace {

struct Link {
  ResolvedLayout rl;
  ShapingFilter filter;
  WaveformGrid grid;
  EstimatorConfig est;
};

Link make_link(const ExperimentConfig& cfg) {
  cfg.validate();
  Link l{resolve_layout(cfg), resolve_filter(cfg), resolve_grid(cfg), cfg.estimator};
  l.est.window_len = l.rl.window_len;
  return l;
}

EstimatorConfig estimator_at(const ExperimentConfig& cfg, const Link& link, double snr_db) {
  EstimatorConfig est = link.est;
  if (cfg.lambda_tracks_snr) est.lambda = std::pow(10.0, -snr_db / 10.0);
  return est;
}

ChannelRealization draw_channel(const ChannelSpec& spec, double sample_rate, Eigen::Index samples, SeededRng& rng) {
  switch (spec.model) {
    case ChannelModel::Flat:
    case ChannelModel::Custom: return flat_channel();
    case ChannelModel::Tdlc:
      return tdlc_realization(spec.delay_spread_ns, spec.speed_kmh, spec.fc_ghz, sample_rate, samples, rng);
    case ChannelModel::Hst: {
      HstConfig h{spec.ds_m, spec.dmin_m, spec.speed_kmh, spec.fc_ghz};
      const double period = 2.0 * h.ds_m / (h.speed_kmh / 3.6);
      return hst_realization(h, rng.uniform() * period, static_cast<double>(samples) / sample_rate, sample_rate);
    }
  }
  throw InvalidArgument("unknown channel model");
}

ComplexVec add_noise(const ComplexVec& x, double variance, SeededRng& rng) {
  return x + rng.complex_noise(x.size(), variance);
}

}  // namespace

std::vector<MetricRecord> run_mse(const ExperimentConfig& cfg) {
  const Link link = make_link(cfg);
  const auto& layout = link.rl.layout;
  const int bps = bits_per_symbol(cfg.scheme);
  const std::size_t points = cfg.snr_db.size();

  std::function<std::vector<double>(int, SeededRng&)> trial = [&](int, SeededRng& rng) {
    SeededRng tx_rng = rng.derive(1), ch_rng = rng.derive(2);
    const BitVec bits = tx_rng.bits(static_cast<std::size_t>(layout.l_d * bps));
    const auto sym = generate_otfdm(bits, cfg.scheme, layout, link.filter, link.grid, tx_rng);
    const auto ch = draw_channel(cfg.channel, link.grid.sample_rate_hz(),
                                 sym.time_samples.size() + 64, ch_rng);
    const ComplexVec clean = apply_channel(sym.time_samples, ch, ch_rng);
    const ComplexVec truth = fold_composite(channel_frequency_response(ch, link.grid), link.filter);
    std::vector<double> mse(points);
    for (std::size_t i = 0; i < points; ++i) {
      SeededRng noise_rng = rng.derive(100 + i);
      const auto rx = add_noise(clean, noise_variance_for_snr(cfg.snr_db[i], link.grid), noise_rng);
      const auto folded = fold_spectrum(front_end(rx, link.grid), link.filter);
      const auto est = estimate_channel(folded, layout, sym.refs.rs_core, estimator_at(cfg, link, cfg.snr_db[i]));
      mse[i] = (est.h_hat_f - truth).cwiseAbs2().mean();
    }
    return mse;
  };
  const auto results = run_trials<std::vector<double>>(cfg.trials, cfg.threads, cfg.seed, kMseStream, trial);

  std::vector<MetricRecord> out;
  for (std::size_t i = 0; i < points; ++i) {
    double sum = 0.0;
    for (const auto& r : results) sum += r[i];
    MetricRecord rec = base_record(cfg, "mse", layout);
    rec.snr_db = cfg.snr_db[i];
    rec.value = sum / cfg.trials;
    out.push_back(rec);
  }
  return out;
}

namespace {

// Per SNR point: bit errors, bits, error energy, reference energy.
using Tally = std::array<double, 4>;
enum Path { kOtfdm, kOtfdmNoArs, kBaseline, kPaths };

struct BerTrial {
  std::vector<std::array<Tally, kPaths>> points;
  std::string diagnostics;
};

void tally(Tally& t, const ComplexVec& est, const ComplexVec& ref, const BitVec& bits, Modulation scheme,
           double noise_var, std::size_t first_index) {
  const auto dem = demodulate(est, scheme, noise_var, first_index);
  for (std::size_t i = 0; i < bits.size(); ++i) t[0] += dem.bits[i] != bits[i];
  t[1] += static_cast<double>(bits.size());
  t[2] += (est - ref).squaredNorm();
  t[3] += ref.squaredNorm();
}

}  // namespace

std::vector<MetricRecord> run_ber(const ExperimentConfig& cfg, std::ostream* diagnostics) {
  const Link link = make_link(cfg);
  const auto& layout = link.rl.layout;
  const int bps = bits_per_symbol(cfg.scheme);
  const std::size_t points = cfg.snr_db.size();
  const bool has_ars = layout.l_ars > 0;

  const int mb = cfg.M / 2;
  WaveformGrid bgrid{mb, 0, link.grid.N, link.grid.n_cp, cfg.scs_khz, std::nullopt};
  bgrid.validate();
  const ComplexVec b_rs = zc_reference(mb);
  const ComplexVec b_rs_f = fft(b_rs);
  const Eigen::Index symlen = link.grid.symbol_length();

  std::function<BerTrial(int, SeededRng&)> trial = [&](int t, SeededRng& rng) {
    SeededRng tx_rng = rng.derive(1), ch_rng = rng.derive(2);
    BerTrial out;
    out.points.assign(points, {});

    const BitVec bits = tx_rng.bits(static_cast<std::size_t>(layout.l_d * bps));
    const auto sym = generate_otfdm(bits, cfg.scheme, layout, link.filter, link.grid, tx_rng);
    const BitVec b_bits = tx_rng.bits(static_cast<std::size_t>(mb * bps));
    const ComplexVec b_data = modulate(b_bits, cfg.scheme, 0);
    ComplexVec b_tx(2 * symlen);
    b_tx << map_and_modulate(b_rs_f, bgrid).time_samples, map_and_modulate(fft(b_data), bgrid).time_samples;

    const auto ch = draw_channel(cfg.channel, link.grid.sample_rate_hz(), 2 * symlen + 64, ch_rng);
    const ComplexVec clean = apply_channel(sym.time_samples, ch, ch_rng);
    const ComplexVec b_clean = apply_channel(b_tx, ch, ch_rng);
    std::optional<ComplexVec> truth;
    if (cfg.genie) truth = fold_composite(channel_frequency_response(ch, link.grid), link.filter);

    for (std::size_t i = 0; i < points; ++i) {
      const double snr = db_to_linear(cfg.snr_db[i]);
      SeededRng noise_rng = rng.derive(100 + i);
      auto& tl = out.points[i];

      const auto rx = add_noise(clean, noise_variance_for_snr(cfg.snr_db[i], link.grid), noise_rng);
      const auto folded = fold_spectrum(front_end(rx, link.grid), link.filter);
      auto est = estimate_channel(folded, layout, sym.refs.rs_core, estimator_at(cfg, link, cfg.snr_db[i]));
      if (truth) est.h_hat_f = *truth;
      auto eq = mmse_equalize(folded, est, 1.0 / snr, layout);
      const std::size_t first = static_cast<std::size_t>(layout.data_begin());
      if (has_ars) {
        const ComplexVec raw = eq.data / eq.bias;
        tally(tl[kOtfdmNoArs], raw, sym.data, bits, cfg.scheme, 1.0 / snr, first);
        eq = ars_phase_correct(eq, sym.refs.ars, layout);
      }
      tally(tl[kOtfdm], ComplexVec(eq.data / eq.bias), sym.data, bits, cfg.scheme, 1.0 / snr, first);
      if (t == 0 && i == 0 && diagnostics) {
        std::ostringstream os;
        dump_receiver(os, folded, est, eq);
        out.diagnostics = os.str();
      }

      const auto b_rx = add_noise(b_clean, noise_variance_for_snr(cfg.snr_db[i], bgrid), noise_rng);
      const ComplexVec y_rs = front_end(b_rx.head(symlen), bgrid);
      const ComplexVec y_d = front_end(b_rx.segment(symlen, symlen), bgrid);
      const ComplexVec h = y_rs.cwiseQuotient(b_rs_f);
      ComplexVec x_f(mb);
      double bias = 0.0;
      for (int k = 0; k < mb; ++k) {
        const double den = std::norm(h(k)) + 1.0 / snr;
        x_f(k) = std::conj(h(k)) * y_d(k) / den;
        bias += std::norm(h(k)) / den;
      }
      const ComplexVec b_est = ifft(x_f) / (bias / mb);
      tally(tl[kBaseline], b_est, b_data, b_bits, cfg.scheme, 1.0 / snr, 0);
    }
    return out;
  };
  const auto results = run_trials<BerTrial>(cfg.trials, cfg.threads, cfg.seed, kBerStream, trial);
  if (diagnostics && !results.empty()) *diagnostics << results.front().diagnostics;

  std::vector<MetricRecord> out;
  const char* names[kPaths] = {"otfdm", "otfdm_noars", "dfts"};
  for (std::size_t i = 0; i < points; ++i) {
    for (int p = 0; p < kPaths; ++p) {
      if (p == kOtfdmNoArs && !has_ars) continue;
      Tally sum{};
      for (const auto& r : results) {
        for (int j = 0; j < 4; ++j) sum[j] += r.points[i][p][j];
      }
      MetricRecord ber = base_record(cfg, std::string("ber_") + names[p], layout);
      ber.snr_db = cfg.snr_db[i];
      ber.value = sum[0] / sum[1];
      out.push_back(ber);
      MetricRecord evm = ber;
      evm.metric = std::string("evm_") + names[p] + "_db";
      evm.value = linear_to_db(std::max(sum[2], 1e-300) / sum[3]);
      out.push_back(evm);
    }
  }
  return out;
}

std::vector<MetricRecord> run_pulse_decay(const ExperimentConfig& cfg) {
  if (cfg.filter.kind != FilterKind::Sqrc) throw InvalidArgument("run_pulse_decay: SQRC filters only");
  const auto filter = resolve_filter(cfg);
  const auto grid = resolve_grid(cfg);
  const auto pulse = effective_pulse(filter, grid);
  MetricRecord r = base_record(cfg, "pulse_tail_fraction", resolve_layout(cfg).layout);
  r.value = pulse_tail_fraction(pulse, grid, cfg.pulse_k);
  r.trials = 1;
  return {r};
}

std::vector<MetricRecord> run_overhead(const ExperimentConfig& cfg) {
  const auto rl = resolve_layout(cfg);
  MetricRecord r = base_record(cfg, "overhead_pct", rl.layout);
  r.value = total_overhead_pct(rl.layout, cfg.filter.extension_pct);
  r.trials = 1;
  return {r};
}

std::vector<MetricRecord> run_metric(const ExperimentConfig& cfg, std::ostream* diagnostics) {
  if (cfg.metric == "papr") return run_papr(cfg).records;
  if (cfg.metric == "mse") return run_mse(cfg);
  if (cfg.metric == "ber") return run_ber(cfg, diagnostics);
  if (cfg.metric == "pulse") return run_pulse_decay(cfg);
  if (cfg.metric == "overhead") return run_overhead(cfg);
  throw InvalidArgument("unknown metric '" + cfg.metric + "'");
}

namespace {

using nlohmann::json;

template <typename T>
std::vector<T> as_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

ChannelModel parse_channel_model(const std::string& s) {
  if (s == "flat" || s == "FLAT" || s == "awgn") return ChannelModel::Flat;
  if (s == "tdlc" || s == "TDLC") return ChannelModel::Tdlc;
  if (s == "hst" || s == "HST") return ChannelModel::Hst;
  throw InvalidArgument("unknown channel model '" + s + "'");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw InvalidArgument(std::string("config: unknown key '") + key + "' in " + where);
    }
  }
}

ExperimentConfig parse_base(const json& j) {
  check_keys(j,
             {"metric", "scheme", "M", "scs_khz", "oversampling", "filter", "taps", "extension_pct", "layout",
              "rs_overhead_pct", "estimator", "channel", "speed_kmh", "snr_db", "trials", "seed", "threads", "genie",
              "pulse_k"},
             "top level");
  ExperimentConfig c;
  c.oversampling = j.value("oversampling", c.oversampling);
  if (j.contains("filter")) {
    const auto f = j.at("filter").get<std::string>();
    if (f == "sqrc") c.filter.kind = FilterKind::Sqrc;
    else if (f == "taps") c.filter.kind = FilterKind::Taps;
    else throw InvalidArgument("config: filter must be 'sqrc' or 'taps'");
  }
  if (j.contains("taps")) c.filter.taps = j.at("taps").get<std::vector<double>>();
  if (j.contains("layout")) {
    const auto& l = j.at("layout");
    check_keys(l, {"mode", "ars_pct", "variant", "l_r", "l_cp", "l_cs", "l_ars", "window_len"}, "layout");
    const auto mode = l.value("mode", std::string("overhead"));
    if (mode == "per_scheme") c.layout.mode = LayoutMode::PerScheme;
    else if (mode == "overhead") c.layout.mode = LayoutMode::Overhead;
    else if (mode == "explicit") c.layout.mode = LayoutMode::Explicit;
    else throw InvalidArgument("config: layout.mode must be per_scheme, overhead or explicit");
    c.layout.ars_pct = l.value("ars_pct", 0.0);
    const auto variant = l.value("variant", std::string("two_sided"));
    if (variant == "one_sided_cp") c.layout.variant = LayoutVariant::OneSidedCp;
    else if (variant != "two_sided") throw InvalidArgument("config: layout.variant must be two_sided or one_sided_cp");
    auto& e = c.layout.explicit_layout;
    e.l_r = l.value("l_r", 0);
    e.l_cp = l.value("l_cp", 0);
    e.l_cs = l.value("l_cs", 0);
    e.l_ars = l.value("l_ars", 0);
    e.variant = c.layout.variant;
    c.layout.explicit_window = l.value("window_len", 0);
  }
  if (j.contains("estimator")) {
    const auto& e = j.at("estimator");
    check_keys(e, {"window_len", "lambda", "precursor", "rs_offset"}, "estimator");
    c.estimator.window_len = e.value("window_len", 0);
    if (e.contains("lambda") && e.at("lambda").is_string()) {
      if (e.at("lambda").get<std::string>() != "snr") {
        throw InvalidArgument("config: estimator.lambda must be a number or \"snr\"");
      }
      c.lambda_tracks_snr = true;
    } else {
      c.estimator.lambda = e.value("lambda", 0.0);
    }
    c.estimator.precursor = e.value("precursor", 2);
    c.estimator.rs_offset = e.value("rs_offset", -1);
  }
  if (j.contains("channel")) {
    const auto& ch = j.at("channel");
    check_keys(ch, {"model", "delay_spread_ns", "fc_ghz", "ds_m", "dmin_m"}, "channel");
    c.channel.model = parse_channel_model(ch.value("model", std::string("flat")));
    c.channel.delay_spread_ns = ch.value("delay_spread_ns", c.channel.delay_spread_ns);
    c.channel.fc_ghz = ch.value("fc_ghz", c.channel.fc_ghz);
    c.channel.ds_m = ch.value("ds_m", c.channel.ds_m);
    c.channel.dmin_m = ch.value("dmin_m", c.channel.dmin_m);
  }
  if (j.contains("snr_db")) c.snr_db = as_list<double>(j.at("snr_db"));
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.genie = j.value("genie", c.genie);
  c.pulse_k = j.value("pulse_k", c.pulse_k);
  return c;
}

}  // namespace

std::vector<ExperimentConfig> parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  std::vector<ExperimentConfig> out;
  try {
    const ExperimentConfig base = parse_base(j);
    const auto metrics = as_list<std::string>(j.value("metric", json("ber")));
    const auto schemes = as_list<std::string>(j.value("scheme", json("qpsk")));
    const auto sizes = as_list<int>(j.value("M", json(240)));
    const auto scs = as_list<double>(j.value("scs_khz", json(30.0)));
    const auto exts = as_list<double>(j.value("extension_pct", json(0.0)));
    const auto ovh = as_list<double>(j.value("rs_overhead_pct", json(8.0)));
    const auto speeds = as_list<double>(j.value("speed_kmh", json(0.0)));
    for (const auto& m : metrics)
      for (const auto& s : schemes)
        for (int M : sizes)
          for (double f : scs)
            for (double e : exts)
              for (double o : ovh)
                for (double v : speeds) {
                  ExperimentConfig c = base;
                  c.metric = m;
                  c.scheme = parse_modulation(s);
                  c.M = M;
                  c.scs_khz = f;
                  c.filter.extension_pct = e;
                  c.layout.rs_overhead_pct = o;
                  c.channel.speed_kmh = v;
                  c.validate();
                  out.push_back(std::move(c));
                }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return out;
}

std::vector<ExperimentConfig> load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {
std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}
}  // namespace

void write_csv(std::ostream& os, const std::vector<MetricRecord>& records) {
  os << kCsvHeader << "\n";
  for (const auto& r : records) {
    os << r.metric << "," << r.scheme << "," << fmt(r.gamma_pct) << "," << fmt(r.rs_overhead_pct) << ","
       << fmt(r.scs_khz) << "," << fmt(r.speed_kmh) << "," << (r.snr_db ? fmt(*r.snr_db) : "") << ","
       << fmt(r.value) << "," << r.trials << "," << r.seed << "\n";
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<MetricRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, records);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<MetricRecord> sweep(const std::vector<ExperimentConfig>& configs, const std::filesystem::path& out) {
  if (configs.empty()) throw InvalidArgument("sweep: no configurations");
  std::vector<MetricRecord> all;
  for (const auto& c : configs) {
    auto r = run_metric(c);
    all.insert(all.end(), r.begin(), r.end());
  }
  write_csv(out, all);
  return all;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double qam16_ber_theory(double snr_linear) {
  // Per-axis noise std sigma with sigma^2 = 1 / (2 snr) and half-spacing a = 1/sqrt(10).
  const double a = 1.0 / std::sqrt(10.0);
  const double sigma = std::sqrt(1.0 / (2.0 * snr_linear));
  return 0.25 * (3.0 * q_function(a / sigma) + 2.0 * q_function(3.0 * a / sigma) - q_function(5.0 * a / sigma));
}

}  // namespace otfdm
