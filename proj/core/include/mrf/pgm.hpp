#pragma once

#include <filesystem>

#include "mrf/types.hpp"

namespace mrf {

/// Writes a binary 16-bit PGM (P5, maxval 65535, big-endian samples).
/// Values are mapped linearly from [lo, hi] to [0, 65535] and clamped.
void write_pgm16(const std::filesystem::path& path, const RVector& image, ImageShape shape,
                 double lo, double hi);

}  // namespace mrf
