#include "viris/normalize.hpp"

#include <cmath>
#include <numbers>

namespace viris {

void StripGeometry::validate() const {
  if (width < 8 || height < 1 || width > 8192 || height > 1024)
    throw ParameterError("strip dimensions out of range");
}

PointPx boundary_point(const Ellipse<double>& e, double theta) {
  const PointPx dir(std::cos(theta), -std::sin(theta));
  return e.center() + e.radius_along(dir) * dir;
}

NormalizedStrip rubber_sheet(const Raster& img, const SegmentationResult& seg, const StripGeometry& geom) {
  return rubber_sheet(img, seg, BinaryMask::Constant(img.height(), img.width(), false), geom);
}

NormalizedStrip rubber_sheet(const Raster& img, const SegmentationResult& seg, const BinaryMask& occlusion,
                             const StripGeometry& geom) {
  geom.validate();
  if (!seg.iris.valid() || !seg.pupil.valid()) throw ParameterError("segmentation ellipses are not valid");
  if (occlusion.rows() != img.height() || occlusion.cols() != img.width())
    throw ParameterError("occlusion mask dimensions differ from the image");

  std::vector<PointPx> inner(geom.width), outer(geom.width);
  for (int j = 0; j < geom.width; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / geom.width;
    inner[j] = boundary_point(seg.pupil, theta);
    outer[j] = boundary_point(seg.iris, theta);
    if (seg.iris.implicit(inner[j]) > 1.0 + 1e-9)
      throw SegmentationError("pupil boundary lies outside the iris boundary");
  }

  std::vector<Plane<double>> planes(img.channels(), Plane<double>::Zero(geom.height, geom.width));
  BinaryMask validity = BinaryMask::Constant(geom.height, geom.width, false);
  const double max_x = img.width() - 1, max_y = img.height() - 1;
  for (int i = 0; i < geom.height; ++i) {
    const double r = (i + 0.5) / geom.height;
    for (int j = 0; j < geom.width; ++j) {
      const PointPx p = (1.0 - r) * inner[j] + r * outer[j];
      for (int c = 0; c < img.channels(); ++c) planes[c](i, j) = sample_bilinear(img.channel(c), p.x(), p.y());
      const bool in_bounds = p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= max_x && p.y() <= max_y;
      if (!in_bounds) continue;
      const auto x = static_cast<Eigen::Index>(std::lround(p.x()));
      const auto y = static_cast<Eigen::Index>(std::lround(p.y()));
      validity(i, j) = !occlusion(y, x);
    }
  }
  return {Raster(std::move(planes)), std::move(validity)};
}

NormalizedStrip enhance_strip(const NormalizedStrip& strip, double gamma, double gain) {
  if (strip.texture.channels() != 3) throw ParameterError("enhancement needs a colour strip");
  return {gamma_correct(extract_red_channel(strip.texture), gamma, gain), strip.validity};
}

}  // namespace viris
