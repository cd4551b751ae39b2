#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace otfdm {

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Baseband samples. Every library operation returns finite values.
using ComplexVec = CVector<double>;
using RealVec = RVector<double>;
using Complex = std::complex<double>;

/// One bit per element, values 0 or 1.
using BitVec = std::vector<std::uint8_t>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// LS reference has a zero spectral bin and no regularization was requested.
class SingularReference : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// MMSE weight would divide by zero (zero channel bin with zero noise variance).
class DegenerateDivision : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Error raised inside one stage of the transmit pipeline, tagged with the stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

}  // namespace otfdm
