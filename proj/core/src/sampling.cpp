#include "mrf/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mrf {

std::size_t SamplingPattern::total_samples(std::size_t coils) const {
  std::size_t total = 0;
  for (std::size_t c : per_frame_counts) total += c;
  return total * coils;
}

void SamplingPattern::refresh_counts() {
  per_frame_counts.assign(frames, 0);
  const std::size_t n = shape.voxels();
  for (std::size_t t = 0; t < frames; ++t) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) count += masks[t * n + i] != 0 ? 1 : 0;
    per_frame_counts[t] = count;
  }
}

void SamplingPattern::validate() const {
  require(shape.voxels() > 0 && frames > 0, "sampling pattern is empty");
  require(masks.size() == frames * shape.voxels(), "mask tensor has the wrong size");
  require(per_frame_counts.size() == frames, "per-frame counts have the wrong length");
  const std::size_t n = shape.voxels();
  for (std::size_t t = 0; t < frames; ++t) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) count += masks[t * n + i] != 0 ? 1 : 0;
    require(count == per_frame_counts[t], "per-frame count disagrees with mask");
    require(count > 0, "every frame must acquire at least one sample");
  }
}

SamplingPattern full_sampling(ImageShape shape, std::size_t frames) {
  require(shape.voxels() > 0 && frames > 0, "sampling pattern is empty");
  SamplingPattern p;
  p.shape = shape;
  p.frames = frames;
  p.density.accel = 1.0;
  p.masks.assign(frames * shape.voxels(), 1);
  p.refresh_counts();
  return p;
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

SamplingPattern make_vd_cartesian_masks(ImageShape shape, std::size_t frames,
                                        const DensityParams& density, std::uint64_t seed) {
  require(shape.voxels() > 0 && frames > 0, "sampling pattern is empty");
  require(std::isfinite(density.accel) && density.accel >= 1.0, "acceleration must be >= 1");
  require(density.gamma >= 0.0, "density exponent must be non-negative");
  require(density.center_radius >= 0, "center radius must be non-negative");

  const std::size_t n = shape.voxels();
  const double k0 = density.k0 > 0.0
                        ? density.k0
                        : static_cast<double>(std::min(shape.height, shape.width)) / 8.0;

  // inclusion probability per grid point; 1 inside the center block
  std::vector<double> weight(n, 0.0);
  std::vector<bool> center(n, false);
  std::size_t center_count = 0;
  for (std::size_t y = 0; y < shape.height; ++y) {
    const long ky = signed_frequency(y, shape.height);
    for (std::size_t x = 0; x < shape.width; ++x) {
      const long kx = signed_frequency(x, shape.width);
      const std::size_t i = y * shape.width + x;
      if (std::labs(ky) <= density.center_radius && std::labs(kx) <= density.center_radius) {
        center[i] = true;
        ++center_count;
      } else {
        const double radius = std::hypot(static_cast<double>(kx), static_cast<double>(ky));
        weight[i] = std::pow(1.0 + radius / k0, -density.gamma);
      }
    }
  }

  const double budget = static_cast<double>(n) / density.accel;
  require(static_cast<double>(center_count) <= budget + 1e-9,
          "acceleration too high: the fully sampled center exceeds the sample budget");
  const double remaining = budget - static_cast<double>(center_count);
  const std::size_t outside = n - center_count;

  std::vector<double> prob(n, 1.0);
  if (remaining < static_cast<double>(outside)) {
    double min_w = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!center[i]) min_w = std::min(min_w, weight[i]);
    }
    const auto expected = [&](double scale) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!center[i]) s += std::min(1.0, scale * weight[i]);
      }
      return s;
    };
    double lo = 0.0;
    double hi = 1.0 / min_w;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (expected(mid) < remaining ? lo : hi) = mid;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!center[i]) prob[i] = std::min(1.0, hi * weight[i]);
    }
  }

  SamplingPattern p;
  p.shape = shape;
  p.frames = frames;
  p.density = density;
  p.density.k0 = k0;
  p.seed = seed;
  p.masks.assign(frames * n, 0);
  for (std::size_t t = 0; t < frames; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    for (std::size_t i = 0; i < n; ++i) {
      const bool take = center[i] || prob[i] >= 1.0 || uniform01(rng) < prob[i];
      p.masks[t * n + i] = take ? 1 : 0;
    }
  }
  p.refresh_counts();
  p.validate();
  return p;
}

CoilKind parse_coil_kind(std::string_view name) {
  if (name == "uniform") return CoilKind::uniform;
  if (name == "gaussian-ring") return CoilKind::gaussian_ring;
  throw std::invalid_argument("unknown coil kind '" + std::string(name) + "'");
}

std::string to_string(CoilKind kind) {
  return kind == CoilKind::uniform ? "uniform" : "gaussian-ring";
}

RVector CoilMaps::root_sum_of_squares() const {
  return sens.cwiseAbs2().rowwise().sum().cwiseSqrt();
}

CoilMaps make_coil_maps(ImageShape shape, std::size_t coils, CoilKind kind) {
  require(shape.voxels() > 0, "coil grid is empty");
  require(coils >= 1, "at least one coil is required");
  CoilMaps maps;
  maps.shape = shape;
  const auto n = static_cast<Eigen::Index>(shape.voxels());
  if (kind == CoilKind::uniform) {
    maps.sens = CMatrix::Ones(n, 1);
    return maps;
  }

  const double extent = static_cast<double>(std::min(shape.height, shape.width));
  const double ring = 0.5 * extent;
  const double width = 0.4 * extent;
  const double cx = 0.5 * (static_cast<double>(shape.width) - 1.0);
  const double cy = 0.5 * (static_cast<double>(shape.height) - 1.0);
  maps.sens.resize(n, static_cast<Eigen::Index>(coils));
  for (std::size_t c = 0; c < coils; ++c) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(coils);
    const double ux = std::cos(theta), uy = std::sin(theta);
    for (std::size_t y = 0; y < shape.height; ++y) {
      for (std::size_t x = 0; x < shape.width; ++x) {
        const double px = static_cast<double>(x) - cx;
        const double py = static_cast<double>(y) - cy;
        const double dx = px - ring * ux, dy = py - ring * uy;
        const double mag = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
        const double phase = theta + 0.5 * std::numbers::pi * (px * ux + py * uy) / extent;
        maps.sens(static_cast<Eigen::Index>(y * shape.width + x), static_cast<Eigen::Index>(c)) =
            std::polar(mag, phase);
      }
    }
  }
  maps.sens /= maps.root_sum_of_squares().maxCoeff();
  return maps;
}

}  // namespace mrf
