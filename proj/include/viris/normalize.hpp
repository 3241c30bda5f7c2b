#pragma once

#include <optional>

#include "viris/raster.hpp"
#include "viris/segmenter.hpp"

namespace viris {

struct StripGeometry {
  int width = 512;
  int height = 64;

  void validate() const;
};

/// Unwrapped iris annulus. Column j is the angle 2 pi j / width measured
/// counter-clockwise on screen from +x; row 0 lies at the pupil.
struct NormalizedStrip {
  Raster texture;
  BinaryMask validity;

  int width() const { return texture.width(); }
  int height() const { return texture.height(); }
};

/// Boundary point on the ray from the ellipse's own centre at angle theta.
PointPx boundary_point(const Ellipse<double>& e, double theta);

/// Rubber-sheet unwrap between the pupil and limbus boundaries. Samples
/// outside the pixel-centre hull or on occluded pixels are invalid.
NormalizedStrip rubber_sheet(const Raster& img, const SegmentationResult& seg, const StripGeometry& geom = {});
NormalizedStrip rubber_sheet(const Raster& img, const SegmentationResult& seg, const BinaryMask& occlusion,
                             const StripGeometry& geom = {});

/// Red channel, then gamma; validity is passed through.
NormalizedStrip enhance_strip(const NormalizedStrip& strip, double gamma = 0.7, double gain = 1.0);

}  // namespace viris
