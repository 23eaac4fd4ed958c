#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mrf {

using Complex = std::complex<double>;

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Spatial grid of an image; pixels are stored row-major, index = y * width + x.
struct ImageShape {
  std::size_t height = 0;
  std::size_t width = 0;

  [[nodiscard]] std::size_t voxels() const { return height * width; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// Raised when a computation produces NaN or Inf.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace mrf
