#include "mrf/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "mrf/bundle.hpp"

namespace mrf {

void write_pgm16(const std::filesystem::path& path, const RVector& image, ImageShape shape,
                 double lo, double hi) {
  require(image.size() == static_cast<Eigen::Index>(shape.voxels()), "image does not match its shape");
  require(hi > lo, "PGM display range must be non-empty");
  std::vector<unsigned char> pixels(2 * shape.voxels());
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    double t = (image[i] - lo) / (hi - lo);
    if (!std::isfinite(t)) t = 0.0;
    const auto v = static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
    pixels[2 * static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> 8);
    pixels[2 * static_cast<std::size_t>(i) + 1] = static_cast<unsigned char>(v & 0xff);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BundleError(BundleErrc::io, "cannot open '" + path.string() + "' for writing");
  out << "P5\n" << shape.width << ' ' << shape.height << "\n65535\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw BundleError(BundleErrc::io, "failed writing '" + path.string() + "'");
}

}  // namespace mrf
