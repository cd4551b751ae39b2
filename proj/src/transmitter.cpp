#include "otfdm/transmitter.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace otfdm {

namespace {
int wrap(int k, int n) {
  const int r = k % n;
  return r < 0 ? r + n : r;
}
}  // namespace

void WaveformGrid::validate() const {
  if (M < 1 || gamma < 0 || N < 1) throw InvalidArgument("WaveformGrid: M, N must be positive and gamma >= 0");
  if (allocation() > N) throw InvalidArgument("WaveformGrid: M + 2 gamma exceeds N");
  if (n_cp < 0 || n_cp > N) throw InvalidArgument("WaveformGrid: n_cp outside [0, N]");
  const int lo = first_subcarrier();
  const int hi = lo + allocation();
  if (lo < -N / 2 || hi > N - N / 2) throw InvalidArgument("WaveformGrid: mapping window outside [-N/2, N/2)");
  if (!(scs_khz > 0.0)) throw InvalidArgument("WaveformGrid: subcarrier spacing must be positive");
}

WaveformGrid make_grid(int M, int gamma, double scs_khz, int oversampling) {
  WaveformGrid g;
  g.M = M;
  g.gamma = gamma;
  g.N = static_cast<int>(next_pow2(static_cast<std::size_t>(std::max(1, oversampling) * (M + 2 * gamma))));
  g.n_cp = static_cast<int>(std::lround(g.N * 144.0 / 2048.0));
  g.scs_khz = scs_khz;
  g.validate();
  return g;
}

ComplexVec multiplex_symbol(const ComplexVec& data, const ComplexVec& rs_block, const ComplexVec& ars,
                            const FrameLayout& layout) {
  layout.validate();
  if (rs_block.size() != layout.l_rs() || data.size() != layout.l_d || ars.size() != layout.l_ars) {
    throw InvalidArgument("multiplex_symbol: component lengths do not match layout");
  }
  ComplexVec x(layout.size());
  x << rs_block, data, ars;
  return x;
}

ShapedSpectrum precode_stages(const ComplexVec& x_t, const ShapingFilter& filter) {
  if (x_t.size() != filter.M) throw InvalidArgument("precode_extend_shape: x_t length != filter M");
  if (filter.weights.size() != filter.extended_size()) throw InvalidArgument("precode_extend_shape: malformed filter");
  ShapedSpectrum s;
  s.x_f = fft(x_t);
  const int M = filter.M;
  s.x_e.resize(filter.extended_size());
  for (int i = 0; i < filter.extended_size(); ++i) s.x_e(i) = s.x_f(wrap(i - filter.gamma, M));
  s.x_s = s.x_e.cwiseProduct(filter.weights.cast<Complex>());
  return s;
}

ComplexVec precode_extend_shape(const ComplexVec& x_t, const ShapingFilter& filter) {
  return precode_stages(x_t, filter).x_s;
}

OtfdmSymbol map_and_modulate(const ComplexVec& x_s, const WaveformGrid& grid) {
  grid.validate();
  if (x_s.size() != grid.allocation()) throw InvalidArgument("map_and_modulate: x_s length != M + 2 gamma");
  OtfdmSymbol sym;
  sym.x_s = x_s;
  sym.x_m = ComplexVec::Zero(grid.N);
  const int first = grid.first_subcarrier();
  for (int i = 0; i < grid.allocation(); ++i) sym.x_m(wrap(first + i, grid.N)) = x_s(i);
  const ComplexVec body = ifft(sym.x_m) * grid.power_scale();
  sym.time_samples.resize(grid.symbol_length());
  sym.time_samples << body.tail(grid.n_cp), body;
  return sym;
}

ComplexVec effective_pulse(const ShapingFilter& filter, const WaveformGrid& grid) {
  grid.validate();
  if (filter.M != grid.M || filter.gamma != grid.gamma) throw InvalidArgument("effective_pulse: filter/grid mismatch");
  ComplexVec spectrum = ComplexVec::Zero(grid.N);
  const int first = grid.first_subcarrier();
  for (int i = 0; i < grid.allocation(); ++i) {
    spectrum(wrap(first + i, grid.N)) = filter.weights(i) * filter.weights(i);
  }
  const ComplexVec p = ifft(spectrum);
  const Complex peak = p(0);
  if (std::abs(peak) == 0.0) throw InvalidArgument("effective_pulse: zero filter");
  ComplexVec centered(grid.N);
  for (int i = 0; i < grid.N; ++i) centered(i) = p(wrap(i - grid.N / 2, grid.N)) / peak;
  return centered;
}

double pulse_tail_fraction(const ComplexVec& pulse, const WaveformGrid& grid, double symbol_periods) {
  if (pulse.size() != grid.N) throw InvalidArgument("pulse_tail_fraction: pulse length != N");
  const double limit = symbol_periods * grid.N / grid.M;
  double total = 0.0, tail = 0.0;
  for (int i = 0; i < grid.N; ++i) {
    const double e = std::norm(pulse(i));
    total += e;
    if (std::abs(static_cast<double>(i - grid.N / 2)) > limit) tail += e;
  }
  return tail / total;
}

ReferenceSignals make_reference_signals(Modulation scheme, const FrameLayout& layout, SeededRng& rng) {
  layout.validate();
  ReferenceSignals refs;
  if (scheme == Modulation::Pi2Bpsk) {
    refs.rs_core = pi2bpsk_reference(layout.l_r, rng, static_cast<std::size_t>(layout.core_begin()));
    refs.ars = layout.l_ars > 0 ? pi2bpsk_reference(layout.l_ars, rng, static_cast<std::size_t>(layout.ars_begin()))
                                : ComplexVec(0);
  } else {
    refs.rs_core = zc_reference(layout.l_r);
    refs.ars = layout.l_ars > 0 ? zc_reference(layout.l_ars) : ComplexVec(0);
  }
  return refs;
}

OtfdmSymbol generate_from_symbols(const ComplexVec& data, const ReferenceSignals& refs, const FrameLayout& layout,
                                  const ShapingFilter& filter, const WaveformGrid& grid) {
  if (layout.size() != filter.M || grid.M != filter.M || grid.gamma != filter.gamma) {
    throw StageError("configure", "layout, filter and grid disagree on M or gamma");
  }
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };
  const ComplexVec block = stage("build_rs_block", [&] { return build_rs_block(refs.rs_core, layout); });
  const ComplexVec x_t = stage("multiplex_symbol", [&] { return multiplex_symbol(data, block, refs.ars, layout); });
  ShapedSpectrum shaped = stage("precode_extend_shape", [&] { return precode_stages(x_t, filter); });
  OtfdmSymbol sym = stage("map_and_modulate", [&] { return map_and_modulate(shaped.x_s, grid); });
  sym.x_t = x_t;
  sym.x_f = std::move(shaped.x_f);
  sym.x_e = std::move(shaped.x_e);
  sym.data = data;
  sym.refs = refs;
  return sym;
}

OtfdmSymbol generate_otfdm(std::span<const std::uint8_t> bits, Modulation scheme, const FrameLayout& layout,
                           const ShapingFilter& filter, const WaveformGrid& grid, SeededRng& rng) {
  ComplexVec data;
  ReferenceSignals refs;
  try {
    layout.validate();
    if (bits.size() != static_cast<std::size_t>(layout.l_d * bits_per_symbol(scheme))) {
      throw InvalidArgument("bit count does not fill l_d data symbols");
    }
    data = modulate(bits, scheme, static_cast<std::size_t>(layout.data_begin()));
    refs = make_reference_signals(scheme, layout, rng);
  } catch (const std::exception& e) {
    throw StageError("modulate", e.what());
  }
  return generate_from_symbols(data, refs, layout, filter, grid);
}

namespace {
void put_le(std::ostream& os, double v) {
  static_assert(sizeof(double) == 8);
  auto bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  os.write(buf, 8);
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::filesystem::path header_path(const std::filesystem::path& path) {
  auto h = path;
  h += ".hdr";
  return h;
}
}  // namespace

void write_waveform(const std::filesystem::path& path, const ComplexVec& samples,
                    const std::map<std::string, std::string>& header) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    put_le(bin, samples(i).real());
    put_le(bin, samples(i).imag());
  }
  if (!bin) throw std::runtime_error("write failed: " + path.string());

  std::ofstream hdr(header_path(path));
  if (!hdr) throw std::runtime_error("cannot open header for " + path.string());
  hdr << "format = cf64le\n";
  hdr << "samples = " << samples.size() << "\n";
  for (const auto& [k, v] : header) hdr << k << " = " << v << "\n";
}

ComplexVec read_waveform(const std::filesystem::path& path) {
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  if (raw.size() % 16 != 0) throw std::runtime_error("truncated waveform file " + path.string());
  ComplexVec out(static_cast<Eigen::Index>(raw.size() / 16));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const auto* p = raw.data() + 16 * i;
    out(i) = {get_le(p), get_le(p + 8)};
  }
  return out;
}

std::map<std::string, std::string> read_waveform_header(const std::filesystem::path& path) {
  std::ifstream hdr(header_path(path));
  if (!hdr) throw std::runtime_error("cannot open header for " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(hdr, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

}  // namespace otfdm
