#include "otfdm/receiver.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace otfdm {

namespace {
int wrap(int k, int n) {
  const int r = k % n;
  return r < 0 ? r + n : r;
}
}  // namespace

ComplexVec front_end(const ComplexVec& rx, const WaveformGrid& grid) {
  grid.validate();
  if (rx.size() < grid.symbol_length()) throw InvalidArgument("front_end: input shorter than N + N_cp");
  const ComplexVec Y = fft(ComplexVec(rx.segment(grid.n_cp, grid.N))) * (static_cast<double>(grid.M) / grid.N);
  ComplexVec y_s(grid.allocation());
  const int first = grid.first_subcarrier();
  for (int i = 0; i < grid.allocation(); ++i) y_s(i) = Y(wrap(first + i, grid.N));
  return y_s;
}

FoldedSymbol fold_spectrum(const ComplexVec& y_s, const ShapingFilter& filter) {
  if (y_s.size() != filter.extended_size()) throw InvalidArgument("fold_spectrum: y_s length != M + 2 gamma");
  FoldedSymbol out;
  out.y_s = y_s;
  out.filter = filter;
  out.y_f = ComplexVec::Zero(filter.M);
  for (int i = 0; i < filter.extended_size(); ++i) {
    out.y_f(wrap(i - filter.gamma, filter.M)) += filter.weights(i) * y_s(i);
  }
  return out;
}

ComplexVec fold_composite(const ComplexVec& h_s, const ShapingFilter& filter) {
  if (h_s.size() != filter.extended_size()) throw InvalidArgument("fold_composite: length != M + 2 gamma");
  ComplexVec c = ComplexVec::Zero(filter.M);
  for (int i = 0; i < filter.extended_size(); ++i) {
    c(wrap(i - filter.gamma, filter.M)) += filter.weights(i) * filter.weights(i) * h_s(i);
  }
  return c;
}

void EstimatorConfig::validate(const FrameLayout& layout) const {
  if (window_len < 1 || window_len > layout.l_r) throw InvalidArgument("EstimatorConfig: window_len outside [1, l_r]");
  if (!(lambda >= 0.0)) throw InvalidArgument("EstimatorConfig: lambda must be >= 0");
  if (precursor < 0) throw InvalidArgument("EstimatorConfig: negative precursor");
  if (layout.variant == LayoutVariant::OneSidedCp && rs_offset > layout.l_cp) {
    throw InvalidArgument("EstimatorConfig: rs_offset exceeds the RS CP");
  }
}

ChannelEstimate estimate_channel(const FoldedSymbol& folded, const FrameLayout& layout, const ComplexVec& rs_core,
                                 const EstimatorConfig& cfg) {
  layout.validate();
  cfg.validate(layout);
  const int M = layout.size();
  const int lr = layout.l_r;
  if (folded.y_f.size() != M) throw InvalidArgument("estimate_channel: folded length != layout M");
  if (rs_core.size() != lr) throw InvalidArgument("estimate_channel: RS core length != l_r");

  int start = layout.core_begin();
  if (layout.variant == LayoutVariant::OneSidedCp) start -= cfg.rs_offset < 0 ? lr / 4 : cfg.rs_offset;

  const ComplexVec y_t = ifft(folded.y_f);
  const ComplexVec block = build_rs_block(rs_core, layout);
  const ComplexVec R =
      fft(ComplexVec(block.segment(start, lr))).cwiseProduct(taps_reference_response(folded.filter, lr));

  ChannelEstimate est;
  const ComplexVec Y = fft(ComplexVec(y_t.segment(start, lr)));
  const RealVec r2 = R.cwiseAbs2();
  const double mean_r2 = r2.mean();
  if (cfg.lambda == 0.0 && r2.minCoeff() <= 1e-14 * mean_r2) {
    throw SingularReference("estimate_channel: reference spectrum has a zero bin; set lambda > 0");
  }
  const double reg = cfg.lambda * mean_r2;
  est.h_f_rs.resize(lr);
  for (int k = 0; k < lr; ++k) est.h_f_rs(k) = Y(k) * std::conj(R(k)) / (r2(k) + reg);
  est.h_t_rs = ifft(est.h_f_rs);

  const int pre = std::min(cfg.precursor, lr - cfg.window_len);
  est.h_w_rs = ComplexVec::Zero(M);
  est.h_w_rs.head(cfg.window_len) = est.h_t_rs.head(cfg.window_len);
  if (pre > 0) est.h_w_rs.tail(pre) = est.h_t_rs.tail(pre);
  est.h_hat_f = fft(est.h_w_rs);
  if (folded.filter.kind == FilterKind::Taps) {
    est.h_hat_f = est.h_hat_f.cwiseProduct(folded.filter.weights.cwiseAbs2().cast<Complex>());
  }
  return est;
}

EqualizedSymbol mmse_equalize(const FoldedSymbol& folded, const ChannelEstimate& est, double noise_var,
                              const FrameLayout& layout) {
  layout.validate();
  const int M = layout.size();
  if (!(noise_var >= 0.0)) throw InvalidArgument("mmse_equalize: noise_var must be >= 0");
  if (folded.y_f.size() != M || est.h_hat_f.size() != M) throw InvalidArgument("mmse_equalize: length mismatch");

  EqualizedSymbol eq;
  eq.x_hat_f.resize(M);
  double bias = 0.0;
  for (int k = 0; k < M; ++k) {
    const Complex h = est.h_hat_f(k);
    const double den = std::norm(h) + noise_var;
    if (den == 0.0) throw DegenerateDivision("mmse_equalize: zero channel bin with zero noise variance");
    eq.x_hat_f(k) = std::conj(h) * folded.y_f(k) / den;
    bias += std::norm(h) / den;
  }
  eq.bias = bias / M;
  eq.x_hat_t = ifft(eq.x_hat_f);
  eq.rs_cp = eq.x_hat_t.segment(0, layout.l_cp);
  eq.rs_core = eq.x_hat_t.segment(layout.core_begin(), layout.l_r);
  eq.rs_cs = eq.x_hat_t.segment(layout.core_begin() + layout.l_r, layout.l_cs);
  eq.data = eq.x_hat_t.segment(layout.data_begin(), layout.l_d);
  eq.ars = eq.x_hat_t.segment(layout.ars_begin(), layout.l_ars);
  return eq;
}

EqualizedSymbol ars_phase_correct(const EqualizedSymbol& eq, const ComplexVec& ars_ref, const FrameLayout& layout) {
  if (layout.l_ars == 0) throw InvalidArgument("ars_phase_correct: layout has no ARS");
  if (ars_ref.size() != layout.l_ars || eq.ars.size() != layout.l_ars || eq.data.size() != layout.l_d) {
    throw InvalidArgument("ars_phase_correct: length mismatch");
  }
  double sum = 0.0;
  int used = 0;
  for (int n = 0; n < layout.l_ars; ++n) {
    const int offset = n + layout.l_cs + layout.l_d;
    if (offset == 0) continue;
    sum += std::arg(eq.ars(n) * std::conj(ars_ref(n))) / offset;
    ++used;
  }
  if (used == 0) throw InvalidArgument("ars_phase_correct: ARS coincides with the RS reference point");

  EqualizedSymbol out = eq;
  out.theta_hat = sum / used;
  if (out.theta_hat == 0.0) return out;
  for (int n = 0; n < layout.l_d; ++n) {
    out.data(n) *= std::polar(1.0, -(n + layout.l_cs) * out.theta_hat);
  }
  out.x_hat_t.segment(layout.data_begin(), layout.l_d) = out.data;
  return out;
}

Demodulated demodulate(const ComplexVec& symbols, Modulation scheme, double noise_var, std::size_t first_index) {
  if (symbols.size() == 0) throw InvalidArgument("demodulate: empty input");
  const int bps = bits_per_symbol(scheme);
  const ComplexVec points = constellation(scheme);
  const double scale = noise_var > 0.0 ? 1.0 / noise_var : 1.0;
  Demodulated out;
  out.bits.resize(static_cast<std::size_t>(symbols.size() * bps));
  out.llr.resize(out.bits.size());
  std::vector<double> best0(static_cast<std::size_t>(bps)), best1(static_cast<std::size_t>(bps));
  for (Eigen::Index n = 0; n < symbols.size(); ++n) {
    Complex y = symbols(n);
    if (scheme == Modulation::Pi2Bpsk && (first_index + static_cast<std::size_t>(n)) % 2 == 1) y *= Complex(0.0, -1.0);
    std::fill(best0.begin(), best0.end(), std::numeric_limits<double>::infinity());
    std::fill(best1.begin(), best1.end(), std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < points.size(); ++i) {
      const double d = std::norm(y - points(i));
      for (int b = 0; b < bps; ++b) {
        auto& best = ((i >> (bps - 1 - b)) & 1) ? best1 : best0;
        best[static_cast<std::size_t>(b)] = std::min(best[static_cast<std::size_t>(b)], d);
      }
    }
    for (int b = 0; b < bps; ++b) {
      const auto idx = static_cast<std::size_t>(n * bps + b);
      const double llr = (best1[static_cast<std::size_t>(b)] - best0[static_cast<std::size_t>(b)]) * scale;
      out.llr[idx] = llr;
      out.bits[idx] = llr < 0.0 ? 1 : 0;
    }
  }
  return out;
}

namespace {
void dump_vec(std::ostream& os, const char* name, const ComplexVec& v) {
  os << name << ": [";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << "[" << v(i).real() << ", " << v(i).imag() << "]";
  }
  os << "]\n";
}
}  // namespace

void dump_receiver(std::ostream& os, const FoldedSymbol& folded, const ChannelEstimate& est,
                   const EqualizedSymbol& eq) {
  const auto prec = os.precision(10);
  dump_vec(os, "y_s", folded.y_s);
  dump_vec(os, "y_f", folded.y_f);
  dump_vec(os, "h_hat_f", est.h_hat_f);
  dump_vec(os, "rs_cp", eq.rs_cp);
  dump_vec(os, "rs_core", eq.rs_core);
  dump_vec(os, "rs_cs", eq.rs_cs);
  dump_vec(os, "data", eq.data);
  dump_vec(os, "ars", eq.ars);
  os << "theta_hat: " << eq.theta_hat << "\n";
  os << "bias: " << eq.bias << "\n";
  os.precision(prec);
}

}  // namespace otfdm
