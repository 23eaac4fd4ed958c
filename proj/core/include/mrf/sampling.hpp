#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mrf/types.hpp"

namespace mrf {

/// Radially decaying sampling density p(k) ~ (1 + |k| / k0)^-gamma with a
/// fully sampled square center block.
struct DensityParams {
  double accel = 8.0;
  double gamma = 2.0;
  double k0 = 0.0;  ///< <= 0 selects min(H, W) / 8
  int center_radius = 4;
};

/// Per-frame Cartesian masks on the dense k-space grid, DC at index 0
/// (unshifted FFT order), frame-major L x H x W.
struct SamplingPattern {
  ImageShape shape;
  std::size_t frames = 0;
  std::vector<std::uint8_t> masks;
  std::vector<std::size_t> per_frame_counts;
  DensityParams density;
  std::uint64_t seed = 0;

  [[nodiscard]] const std::uint8_t* frame_mask(std::size_t t) const {
    return masks.data() + t * shape.voxels();
  }
  [[nodiscard]] std::size_t total_samples(std::size_t coils) const;

  /// Recomputes per_frame_counts from masks and checks invariants.
  void refresh_counts();
  void validate() const;
};

/// Signed frequency index of grid position `i` on an axis of length `n`.
inline long signed_frequency(std::size_t i, std::size_t n) {
  return i < (n + 1) / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

SamplingPattern make_vd_cartesian_masks(ImageShape shape, std::size_t frames,
                                        const DensityParams& density, std::uint64_t seed);

SamplingPattern full_sampling(ImageShape shape, std::size_t frames);

enum class CoilKind { uniform, gaussian_ring };

CoilKind parse_coil_kind(std::string_view name);
std::string to_string(CoilKind kind);

/// Complex receive sensitivities, n x C, normalized so max RSS == 1.
struct CoilMaps {
  ImageShape shape;
  CMatrix sens;

  [[nodiscard]] std::size_t coils() const { return static_cast<std::size_t>(sens.cols()); }
  [[nodiscard]] RVector root_sum_of_squares() const;
};

/// `uniform` always yields a single all-ones coil regardless of `coils`.
CoilMaps make_coil_maps(ImageShape shape, std::size_t coils, CoilKind kind);

}  // namespace mrf
