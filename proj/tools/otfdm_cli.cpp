// Command-line front end: waveform export and Monte-Carlo metrics to CSV.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "otfdm/harness.hpp"

using namespace otfdm;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int threads = 0;
  int verbose = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("config", c.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "override the config seed");
  app->add_option("--trials", c.trials, "override the config trial count")->check(CLI::PositiveNumber);
  app->add_option("-o,--out", c.out, "output path (CSV, or waveform file for tx); stdout if omitted");
  app->add_option("-j,--threads", c.threads, "worker threads (default: config value)");
  app->add_flag("-v,--verbose", c.verbose, "receiver diagnostics to stderr");
}

std::vector<ExperimentConfig> load(const Common& c, const std::string& forced_metric) {
  auto configs = load_config(c.config);
  for (auto& cfg : configs) {
    if (!forced_metric.empty()) cfg.metric = forced_metric;
    if (c.seed) cfg.seed = *c.seed;
    if (c.trials) cfg.trials = *c.trials;
    if (c.threads > 0) cfg.threads = c.threads;
  }
  return configs;
}

void emit(const Common& c, const std::vector<MetricRecord>& records) {
  for (const auto& r : records) {
    if (r.warning) std::cerr << "warning: " << r.metric << " (" << r.scheme << "): " << r.note << "\n";
  }
  if (c.out.empty()) {
    write_csv(std::cout, records);
  } else {
    write_csv(std::filesystem::path(c.out), records);
  }
}

int run_metric_command(const Common& c, const std::string& metric, const std::string& curves) {
  std::vector<MetricRecord> all;
  std::vector<std::pair<std::string, PaprResult>> papr;
  for (const auto& cfg : load(c, metric)) {
    if (metric == "papr") {
      auto res = run_papr(cfg);
      all.insert(all.end(), res.records.begin(), res.records.end());
      std::ostringstream tag;
      tag << to_string(cfg.scheme) << "," << cfg.filter.extension_pct;
      papr.emplace_back(tag.str(), std::move(res));
    } else {
      auto r = run_metric(cfg, c.verbose ? &std::cerr : nullptr);
      all.insert(all.end(), r.begin(), r.end());
    }
  }
  emit(c, all);
  if (!curves.empty()) {
    std::ofstream os(curves);
    if (!os) throw std::runtime_error("cannot write " + curves);
    os << "scheme,gamma_pct,threshold_db,ccdf_otfdm,ccdf_dfts\n";
    for (const auto& [tag, res] : papr) {
      for (std::size_t i = 0; i < res.otfdm_curve.size(); ++i) {
        os << tag << "," << res.otfdm_curve[i].threshold << "," << res.otfdm_curve[i].probability << ","
           << res.baseline_curve[i].probability << "\n";
      }
    }
  }
  return 0;
}

int run_tx(const Common& c, const std::string& channel_dump) {
  if (c.out.empty()) throw InvalidArgument("tx: --out is required");
  const auto configs = load(c, "");
  const auto& cfg = configs.front();
  const auto rl = resolve_layout(cfg);
  const auto filter = resolve_filter(cfg);
  const auto grid = resolve_grid(cfg);
  SeededRng rng(cfg.seed, 0);
  const BitVec bits = rng.bits(static_cast<std::size_t>(rl.layout.l_d * bits_per_symbol(cfg.scheme)));
  const auto sym = generate_otfdm(bits, cfg.scheme, rl.layout, filter, grid, rng);

  std::map<std::string, std::string> hdr = {
      {"scheme", std::string(to_string(cfg.scheme))},
      {"M", std::to_string(grid.M)},
      {"gamma", std::to_string(grid.gamma)},
      {"N", std::to_string(grid.N)},
      {"n_cp", std::to_string(grid.n_cp)},
      {"scs_khz", std::to_string(grid.scs_khz)},
      {"sample_rate_hz", std::to_string(grid.sample_rate_hz())},
      {"start_sc", std::to_string(grid.first_subcarrier())},
      {"l_r", std::to_string(rl.layout.l_r)},
      {"l_cp", std::to_string(rl.layout.l_cp)},
      {"l_cs", std::to_string(rl.layout.l_cs)},
      {"l_d", std::to_string(rl.layout.l_d)},
      {"l_ars", std::to_string(rl.layout.l_ars)},
      {"filter", filter.kind == FilterKind::Sqrc ? "sqrc" : "taps"},
      {"extension_pct", std::to_string(filter.extension_pct())},
      {"oversampling", std::to_string(cfg.oversampling)},
      {"seed", std::to_string(cfg.seed)},
  };
  write_waveform(c.out, sym.time_samples, hdr);

  if (!channel_dump.empty()) {
    SeededRng ch_rng(cfg.seed, 1);
    ChannelRealization ch;
    if (cfg.channel.model == ChannelModel::Tdlc) {
      ch = tdlc_realization(cfg.channel.delay_spread_ns, cfg.channel.speed_kmh, cfg.channel.fc_ghz,
                            grid.sample_rate_hz(), grid.symbol_length(), ch_rng);
    } else if (cfg.channel.model == ChannelModel::Hst) {
      HstConfig h{cfg.channel.ds_m, cfg.channel.dmin_m, cfg.channel.speed_kmh, cfg.channel.fc_ghz};
      ch = hst_realization(h, 0.0, grid.symbol_length() / grid.sample_rate_hz(), grid.sample_rate_hz());
    } else {
      ch = flat_channel();
    }
    std::ofstream os(channel_dump);
    if (!os) throw std::runtime_error("cannot write " + channel_dump);
    dump_channel(os, ch);
  }
  if (c.verbose) {
    std::cerr << "wrote " << sym.time_samples.size() << " samples to " << c.out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OTFDM link-level simulator"};
  app.require_subcommand(1);

  Common tx_c, papr_c, mse_c, ber_c, pulse_c, sweep_c;
  std::string channel_dump, curves;

  auto* tx = app.add_subcommand("tx", "generate one symbol and write it as interleaved float64 I/Q");
  add_common(tx, tx_c);
  tx->add_option("--channel-dump", channel_dump, "also draw the configured channel and dump it as YAML");

  auto* papr = app.add_subcommand("papr", "PAPR at the 1% CCDF point, OTFDM vs DFT-s-OFDM");
  add_common(papr, papr_c);
  papr->add_option("--curves", curves, "write full CCDF curves to this CSV");

  auto* mse = app.add_subcommand("mse", "channel-estimation MSE");
  add_common(mse, mse_c);
  auto* ber = app.add_subcommand("ber", "uncoded BER and EVM vs SNR");
  add_common(ber, ber_c);
  auto* pulse = app.add_subcommand("pulse", "effective-pulse tail energy");
  add_common(pulse, pulse_c);
  auto* sw = app.add_subcommand("sweep", "run every expanded config with its own metric into one CSV");
  add_common(sw, sweep_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*tx) return run_tx(tx_c, channel_dump);
    if (*papr) return run_metric_command(papr_c, "papr", curves);
    if (*mse) return run_metric_command(mse_c, "mse", "");
    if (*ber) return run_metric_command(ber_c, "ber", "");
    if (*pulse) return run_metric_command(pulse_c, "pulse", "");
    if (*sw) return run_metric_command(sweep_c, "", "");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
