#include "otfdm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otfdm {

double papr_db(const ComplexVec& x) {
  if (x.size() == 0) throw InvalidArgument("papr_db: empty input");
  const RealVec power = x.cwiseAbs2();
  const double mean = power.mean();
  if (!(mean > 0.0)) throw InvalidArgument("papr_db: all-zero input");
  return linear_to_db(power.maxCoeff() / mean);
}

std::vector<double> instantaneous_power_db(const ComplexVec& x) {
  if (x.size() == 0) throw InvalidArgument("instantaneous_power_db: empty input");
  const RealVec power = x.cwiseAbs2();
  const double mean = power.mean();
  if (!(mean > 0.0)) throw InvalidArgument("instantaneous_power_db: all-zero input");
  std::vector<double> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[static_cast<std::size_t>(i)] = power(i) > 0.0 ? linear_to_db(power(i) / mean)
                                                      : -std::numeric_limits<double>::infinity();
  }
  return out;
}

std::vector<CcdfPoint> ccdf(std::span<const double> values, std::span<const double> grid) {
  if (values.empty() || grid.empty()) throw InvalidArgument("ccdf: empty input");
  if (!std::is_sorted(grid.begin(), grid.end())) throw InvalidArgument("ccdf: grid not ascending");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<CcdfPoint> out;
  out.reserve(grid.size());
  for (double t : grid) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    out.push_back({t, static_cast<double>(above) / n});
  }
  return out;
}

double ccdf_threshold(std::vector<double> values, double probability) {
  if (values.empty()) throw InvalidArgument("ccdf_threshold: empty input");
  if (!(probability >= 0.0 && probability <= 1.0)) throw InvalidArgument("ccdf_threshold: probability outside [0,1]");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  // At most floor(p*n) values may lie strictly above the answer.
  const auto allowed = static_cast<std::size_t>(std::floor(probability * static_cast<double>(n)));
  const std::size_t idx = allowed >= n ? 0 : n - 1 - allowed;
  return values[idx];
}

DbHistogram::DbHistogram(double lo_db, double hi_db, double step_db)
    : lo_(lo_db), step_(step_db) {
  if (!(hi_db > lo_db) || !(step_db > 0.0)) throw InvalidArgument("DbHistogram: bad range");
  bins_.assign(static_cast<std::size_t>(std::ceil((hi_db - lo_db) / step_db)) + 2, 0);
}

void DbHistogram::add(double value_db) {
  // Bin 0 collects underflow (including -inf), the last bin overflow.
  std::size_t idx = 0;
  if (value_db >= lo_) {
    const double pos = std::floor((value_db - lo_) / step_) + 1.0;
    idx = std::min(static_cast<std::size_t>(pos), bins_.size() - 1);
  }
  ++bins_[idx];
  ++total_;
}

void DbHistogram::merge(const DbHistogram& other) {
  if (other.bins_.size() != bins_.size() || other.lo_ != lo_ || other.step_ != step_) {
    throw InvalidArgument("DbHistogram::merge: layout mismatch");
  }
  for (std::size_t i = 0; i < bins_.size(); ++i) bins_[i] += other.bins_[i];
  total_ += other.total_;
}

double DbHistogram::exceedance(double threshold_db) const {
  if (total_ == 0) throw InvalidArgument("DbHistogram: empty");
  // Values in a bin are treated as lying at its upper edge.
  std::uint64_t above = 0;
  for (std::size_t i = bins_.size(); i-- > 1;) {
    const double upper = lo_ + static_cast<double>(i) * step_;
    if (upper <= threshold_db) break;
    above += bins_[i];
  }
  return static_cast<double>(above) / static_cast<double>(total_);
}

double DbHistogram::threshold(double probability) const {
  if (total_ == 0) throw InvalidArgument("DbHistogram: empty");
  const auto allowed = static_cast<std::uint64_t>(std::floor(probability * static_cast<double>(total_)));
  std::uint64_t above = 0;
  for (std::size_t i = bins_.size(); i-- > 1;) {
    if (above + bins_[i] > allowed) return lo_ + static_cast<double>(i) * step_;
    above += bins_[i];
  }
  return lo_;
}

std::vector<CcdfPoint> DbHistogram::curve(std::span<const double> grid) const {
  std::vector<CcdfPoint> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back({t, exceedance(t)});
  return out;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id), engine_(mix64(mix64(seed) ^ mix64(~stream_id))) {}

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

Complex SeededRng::complex_normal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

BitVec SeededRng::bits(std::size_t count) {
  BitVec out(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = engine_();
    out[i] = static_cast<std::uint8_t>(word & 1U);
    word >>= 1;
  }
  return out;
}

ComplexVec SeededRng::complex_noise(Eigen::Index count, double variance) {
  ComplexVec out(count);
  for (Eigen::Index i = 0; i < count; ++i) out(i) = complex_normal(variance);
  return out;
}

SeededRng SeededRng::derive(std::uint64_t child) const {
  return SeededRng(mix64(seed_ ^ mix64(stream_)), child);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double evm_db(const ComplexVec& estimate, const ComplexVec& reference) {
  if (estimate.size() != reference.size() || reference.size() == 0) {
    throw InvalidArgument("evm_db: size mismatch or empty");
  }
  const double ref = reference.squaredNorm();
  if (!(ref > 0.0)) throw InvalidArgument("evm_db: zero reference");
  const double err = (estimate - reference).squaredNorm();
  return linear_to_db(std::max(err, 1e-300) / ref);
}

}  // namespace otfdm
