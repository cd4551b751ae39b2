#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "otfdm/types.hpp"

namespace otfdm {

enum class Direction { Forward, Inverse };

/// Discrete Fourier transform of any length >= 1.
///
/// Forward is unnormalized, X(k) = sum_n x(n) e^{-j2pi kn/L}.
/// Inverse carries the 1/L factor, so dft(dft(x, Forward), Inverse) == x.
template <typename Scalar>
CVector<Scalar> dft(const CVector<Scalar>& x, Direction dir) {
  if (x.size() == 0) throw InvalidArgument("dft: zero-length input");
  if (x.size() == 1) return x;  // kissfft has no length-1 plan
  // Plans are cached per length inside the engine; one engine per thread.
  thread_local Eigen::FFT<Scalar> engine;
  CVector<Scalar> out(x.size());
  if (dir == Direction::Forward) {
    engine.fwd(out, x);
  } else {
    engine.inv(out, x);
  }
  return out;
}

template <typename Scalar>
CVector<Scalar> fft(const CVector<Scalar>& x) {
  return dft(x, Direction::Forward);
}

template <typename Scalar>
CVector<Scalar> ifft(const CVector<Scalar>& x) {
  return dft(x, Direction::Inverse);
}

/// 10 log10(max |x|^2 / mean |x|^2).
double papr_db(const ComplexVec& x);

/// Instantaneous power of every sample relative to the vector mean, in dB.
/// Samples with zero power are reported as -inf.
std::vector<double> instantaneous_power_db(const ComplexVec& x);

struct CcdfPoint {
  double threshold;
  double probability;  // P(value > threshold)
};

/// Empirical complementary CDF of `values` evaluated on an ascending grid.
std::vector<CcdfPoint> ccdf(std::span<const double> values, std::span<const double> grid);

/// Smallest observed value t with P(value > t) <= probability.
double ccdf_threshold(std::vector<double> values, double probability);

/// Fixed-resolution histogram for CCDFs over very many samples.
/// Merging is associative, so partial histograms from workers can be summed in any order.
class DbHistogram {
 public:
  DbHistogram(double lo_db = -60.0, double hi_db = 30.0, double step_db = 1e-3);

  void add(double value_db);
  void merge(const DbHistogram& other);

  std::uint64_t count() const { return total_; }
  /// P(value > threshold).
  double exceedance(double threshold_db) const;
  /// Upper edge of the first bin at which exceedance drops to <= probability.
  double threshold(double probability) const;
  std::vector<CcdfPoint> curve(std::span<const double> grid) const;

 private:
  double lo_, step_;
  std::vector<std::uint64_t> bins_;
  std::uint64_t total_ = 0;
};

/// Deterministic random source keyed by (seed, stream_id).
///
/// Not shareable between threads; derive one per worker through stream ids.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  /// Standard real normal (Box-Muller, platform independent).
  double normal();
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  Complex complex_normal(double variance = 1.0);
  BitVec bits(std::size_t count);
  ComplexVec complex_noise(Eigen::Index count, double variance);

  /// Independent child stream.
  SeededRng derive(std::uint64_t child) const;

 private:
  std::uint64_t seed_, stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer; used to decorrelate seeds and stream ids.
std::uint64_t mix64(std::uint64_t x);

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

/// 10 log10(sum|estimate - reference|^2 / sum|reference|^2).
double evm_db(const ComplexVec& estimate, const ComplexVec& reference);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace otfdm
