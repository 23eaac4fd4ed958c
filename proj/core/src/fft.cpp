#include "mrf/fft.hpp"

#include <cmath>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace mrf {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Fft2::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  double scale = 1.0;

  Plans() = default;
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (fwd != nullptr) fftw_destroy_plan(fwd);
    if (inv != nullptr) fftw_destroy_plan(inv);
  }
};

Fft2::Fft2(ImageShape shape) : shape_(shape), plans_(std::make_unique<Plans>()) {
  require(shape.height >= 1 && shape.width >= 1, "FFT grid must be non-empty");
  const int h = static_cast<int>(shape.height);
  const int w = static_cast<int>(shape.width);
  std::vector<Complex> scratch(shape.voxels());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  // FFTW_ESTIMATE keeps planning deterministic; UNALIGNED allows any buffer
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  {
    std::lock_guard lock(planner_mutex());
    plans_->fwd = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, flags);
    plans_->inv = fftw_plan_dft_2d(h, w, buf, buf, FFTW_BACKWARD, flags);
  }
  plans_->scale = 1.0 / std::sqrt(static_cast<double>(shape.voxels()));
  if (plans_->fwd == nullptr || plans_->inv == nullptr) throw std::runtime_error("FFTW planning failed");
}

Fft2::~Fft2() = default;

Fft2::Fft2(Fft2&&) noexcept = default;
Fft2& Fft2::operator=(Fft2&&) noexcept = default;

void Fft2::forward(Complex* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plans_->fwd, buf, buf);
  const std::size_t n = shape_.voxels();
  for (std::size_t i = 0; i < n; ++i) data[i] *= plans_->scale;
}

void Fft2::inverse(Complex* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plans_->inv, buf, buf);
  const std::size_t n = shape_.voxels();
  for (std::size_t i = 0; i < n; ++i) data[i] *= plans_->scale;
}

}  // namespace mrf
