#pragma once

#include <filesystem>

#include "viris/raster.hpp"

namespace viris {

/// Loads an 8- or 16-bit PNG. Grey (and grey+alpha) files load as one
/// channel, everything else as RGB; alpha is discarded. Samples are mapped
/// to [0, 1] by v / (2^depth - 1).
Raster load_png(const std::filesystem::path& path);

/// Writes 8-bit grey or RGB; samples are rounded from [0, 1] to [0, 255].
void save_png(const Raster& img, const std::filesystem::path& path);

/// Writes 16-bit greyscale; samples are rounded from [0, 1] to [0, 65535].
void save_png16(const Plane<double>& img, const std::filesystem::path& path);

/// Mask files: 0 = background, anything else = foreground.
BinaryMask load_mask_png(const std::filesystem::path& path);
void save_mask_png(const BinaryMask& mask, const std::filesystem::path& path);

Raster mask_to_raster(const BinaryMask& mask);

}  // namespace viris
