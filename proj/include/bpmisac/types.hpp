#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bpmisac {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Error taxonomy. Every operation that can fail throws one of these.
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SizeLimitError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InfeasibleSelection : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleStart : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientSnapshots : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace bpmisac
