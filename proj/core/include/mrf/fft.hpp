#pragma once

#include <memory>

#include "mrf/types.hpp"

namespace mrf {

/// Unitary 2-D DFT on a row-major H x W grid (1/sqrt(HW) both directions).
/// Transforms run in place; execution is thread-safe, DC sits at index 0.
class Fft2 {
 public:
  explicit Fft2(ImageShape shape);
  ~Fft2();
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;
  Fft2(Fft2&&) noexcept;
  Fft2& operator=(Fft2&&) noexcept;

  void forward(Complex* data) const;
  void inverse(Complex* data) const;

  [[nodiscard]] ImageShape shape() const { return shape_; }

 private:
  struct Plans;
  ImageShape shape_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace mrf
