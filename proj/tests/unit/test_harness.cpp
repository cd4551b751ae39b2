#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "otfdm/harness.hpp"

using namespace otfdm;

namespace {

std::string csv(const std::vector<MetricRecord>& records) {
  std::ostringstream os;
  write_csv(os, records);
  return os.str();
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("otfdm_harness_" + name);
}

ExperimentConfig small_tdlc(const std::string& metric) {
  ExperimentConfig c;
  c.metric = metric;
  c.scheme = Modulation::Qam16;
  c.M = 96;
  c.filter.extension_pct = 5.0;
  c.channel.model = ChannelModel::Tdlc;
  c.channel.delay_spread_ns = 300.0;
  c.channel.speed_kmh = 60.0;
  c.snr_db = {10.0, 20.0};
  c.trials = 12;
  c.seed = 77;
  return c;
}

}  // namespace

TEST_CASE("per-scheme overhead rows") {
  std::vector<MetricRecord> rows;
  for (const auto& row : scheme_layout_rows()) {
    ExperimentConfig c;
    c.metric = "overhead";
    c.scheme = row.scheme;
    c.M = kSchemeLayoutM;
    c.layout.mode = LayoutMode::PerScheme;
    c.filter.extension_pct = row.extension_pct;
    const auto r = run_metric(c);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  REQUIRE(rows.size() == 5);
  // Rows whose printed lengths agree with the printed percentage.
  CHECK(rows[1].value == doctest::Approx(5.4).epsilon(0.02));
  CHECK(rows[2].value == doctest::Approx(7.0).epsilon(0.02));
  CHECK(rows[3].value == doctest::Approx(12.7).epsilon(0.01));
  // The pi/2-BPSK and 256-QAM lengths add up to 4.68% and 13.78%, not the printed 4.9% and 13.5%.
  CHECK(rows[0].value == doctest::Approx(100.0 * 146 / 3120).epsilon(1e-9));
  CHECK(rows[4].value == doctest::Approx(100.0 * 274 / 3120 + 5.0).epsilon(1e-9));
}

TEST_CASE("scaled layouts") {
  const auto t = scheme_layout(Modulation::Qam16, 240);
  CHECK(t.layout.l_r == 8);
  CHECK(t.layout.l_cp == 6);
  CHECK(t.layout.l_cs == 2);
  CHECK(t.layout.size() == 240);

  const auto o = overhead_layout(8.0, 240);
  CHECK(o.layout.l_rs() == 20);
  CHECK(o.layout.l_r == 10);
  CHECK(o.layout.l_cp == 8);
  CHECK(o.layout.l_cs == 2);
  CHECK(o.window_len == 8);

  const auto one = overhead_layout(8.0, 240, 2.0, LayoutVariant::OneSidedCp);
  CHECK(one.layout.l_cp == one.layout.l_r);
  CHECK(one.layout.l_cs == 0);
  CHECK(one.layout.l_ars == 4);
}

TEST_CASE("pulse tail metric") {
  ExperimentConfig c;
  c.metric = "pulse";
  c.M = 240;
  std::vector<double> tails;
  for (double pct : {0.0, 5.0, 10.0, 20.0, 50.0}) {
    c.filter.extension_pct = pct;
    tails.push_back(run_metric(c).front().value);
  }
  for (std::size_t i = 1; i < tails.size(); ++i) CHECK(tails[i] < tails[i - 1]);
  CHECK(tails.back() < 1e-3);
}

TEST_CASE("noiseless in-window MSE is at the exactness floor") {
  ExperimentConfig c;
  c.metric = "mse";
  c.M = 240;
  c.filter.extension_pct = 10.0;
  c.snr_db = {400.0};
  c.trials = 4;
  const auto r = run_mse(c);
  REQUIRE(r.size() == 1);
  CHECK(r[0].value < 1e-12);
}

TEST_CASE("records are a pure function of config and seed") {
  for (const char* metric : {"mse", "ber"}) {
    CAPTURE(metric);
    auto c = small_tdlc(metric);
    const auto serial = csv(run_metric(c));
    CHECK(serial == csv(run_metric(c)));
    c.threads = 3;
    CHECK(serial == csv(run_metric(c)));
    c.seed = 78;
    CHECK(serial != csv(run_metric(c)));
  }
}

TEST_CASE("run_trials keeps trial order across workers") {
  std::function<std::uint64_t(int, SeededRng&)> fn = [](int, SeededRng& rng) { return rng.next_u64(); };
  const auto a = run_trials<std::uint64_t>(50, 1, 9, 100, fn);
  const auto b = run_trials<std::uint64_t>(50, 4, 9, 100, fn);
  CHECK(a == b);
  CHECK(a[3] == SeededRng(9, 103).next_u64());
  std::function<int(int, SeededRng&)> bad = [](int t, SeededRng&) -> int {
    if (t == 7) throw InvalidArgument("boom");
    return t;
  };
  CHECK_THROWS_AS(run_trials<int>(20, 3, 1, 0, bad), InvalidArgument);
}

TEST_CASE("BER records") {
  auto c = small_tdlc("ber");
  c.layout.ars_pct = 2.0;
  const auto r = run_ber(c);
  std::set<std::string> names;
  for (const auto& rec : r) names.insert(rec.metric);
  for (const char* m : {"ber_otfdm", "ber_otfdm_noars", "ber_dfts", "evm_otfdm_db", "evm_dfts_db"}) {
    CHECK(names.contains(m));
  }
  for (const auto& rec : r) {
    CHECK(rec.snr_db.has_value());
    CHECK(std::isfinite(rec.value));
  }
}

TEST_CASE("PAPR records warn below the recommended trial count") {
  ExperimentConfig c;
  c.metric = "papr";
  c.filter.extension_pct = 10.0;
  c.trials = 300;
  const auto r = run_papr(c);
  REQUIRE_FALSE(r.records.empty());
  CHECK(r.records.front().warning);
  CHECK(r.otfdm_curve.size() == r.baseline_curve.size());
  for (const auto& rec : r.records) CHECK_FALSE(rec.snr_db.has_value());
}

TEST_CASE("config parsing") {
  const auto configs = parse_config(R"({
    "metric": "mse", "scheme": ["qpsk", "qam64"], "extension_pct": [0, 5, 10],
    "layout": {"mode": "overhead"}, "rs_overhead_pct": 8,
    "channel": {"model": "tdlc", "delay_spread_ns": 1000}, "snr_db": [30], "trials": 10, "seed": 4})");
  REQUIRE(configs.size() == 6);
  CHECK(configs[0].scheme == Modulation::Qpsk);
  CHECK(configs[2].filter.extension_pct == 10.0);
  CHECK(configs[3].scheme == Modulation::Qam64);
  CHECK(configs[5].channel.model == ChannelModel::Tdlc);
  CHECK(configs[5].seed == 4);

  const auto snr = parse_config(R"({"scheme": "pi2bpsk", "filter": "taps", "taps": [1, -1],
                                    "estimator": {"lambda": "snr"}})");
  CHECK(snr[0].lambda_tracks_snr);

  for (const char* bad : {
           "{",
           "[]",
           R"({"bogus": 1})",
           R"({"scheme": "8psk"})",
           R"({"metric": "bler"})",
           R"({"trials": 0})",
           R"({"channel": {"model": "rician"}})",
           R"({"layout": {"mode": "table3"}})",
           R"({"estimator": {"lambda": "auto"}})",
           R"({"estimator": {"lambda": -1}})",
           R"({"filter": "taps", "taps": [1, -1], "extension_pct": 5})",
           R"({"trials": "many"})",
       }) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_config(bad), InvalidArgument);
  }
}

TEST_CASE("sweep writes one CSV with a fixed header") {
  ExperimentConfig a;
  a.metric = "pulse";
  ExperimentConfig b = a;
  b.filter.extension_pct = 10.0;
  const auto path = scratch("sweep.csv");
  const auto records = sweep({a, b}, path);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  CHECK(header == kCsvHeader);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 9);
  }
  CHECK(rows == 2);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(sweep({}, path), InvalidArgument);
}

TEST_CASE("Gray 16-QAM closed form") {
  CHECK(q_function(0.0) == doctest::Approx(0.5));
  CHECK(qam16_ber_theory(db_to_linear(12.0)) == doctest::Approx(0.0281).epsilon(0.01));
}

TEST_CASE("command-line tool") {
  const auto cfg = scratch("cli.json");
  const auto wave = scratch("cli.cf64");
  const auto out = scratch("cli.csv");
  std::ofstream(cfg) << R"({"metric": "pulse", "extension_pct": [0, 10], "M": 48})";
  auto run = [](const std::string& args) {
    return std::system((std::string(OTFDM_CLI) + " " + args + " 2>/dev/null >/dev/null").c_str());
  };
  CHECK(run("pulse " + cfg.string() + " --out " + out.string()) == 0);
  std::ifstream csv_in(out);
  std::string header;
  std::getline(csv_in, header);
  CHECK(header == kCsvHeader);

  CHECK(run("tx " + cfg.string() + " --seed 3 --out " + wave.string()) == 0);
  const auto hdr = read_waveform_header(wave);
  const auto n = std::stoul(hdr.at("N")) + std::stoul(hdr.at("n_cp"));
  CHECK(std::filesystem::file_size(wave) == 16 * n);

  CHECK(run("tx " + cfg.string()) != 0);
  CHECK(run("ber " + scratch("missing.json").string()) != 0);
  std::ofstream(cfg) << R"({"trials": -3})";
  CHECK(run("ber " + cfg.string()) != 0);
  CHECK(run("frobnicate") != 0);

  for (const auto& p : {cfg, wave, out}) std::filesystem::remove(p);
  std::filesystem::remove(wave.string() + ".hdr");
}
