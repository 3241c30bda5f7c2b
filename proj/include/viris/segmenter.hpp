#pragma once

#include <optional>
#include <string_view>
#include <utility>

#include "viris/geometry.hpp"
#include "viris/raster.hpp"

namespace viris {

enum class SegmentationSource { ExternalMask, Refit, RegressedFallback, Classical };

std::string_view source_name(SegmentationSource s);
SegmentationSource source_from_name(std::string_view name);

/// Iris and pupil regions with their fitted boundaries. The iris mask
/// covers the pupil; see enforce_containment.
struct SegmentationResult {
  BinaryMask iris_mask;
  BinaryMask pupil_mask;
  Ellipse<double> iris;
  Ellipse<double> pupil;
  SegmentationSource source = SegmentationSource::Refit;
  bool degraded = false;

  int width() const { return static_cast<int>(iris_mask.cols()); }
  int height() const { return static_cast<int>(iris_mask.rows()); }
};

/// bit = (probability >= t), for t in (0, 1).
BinaryMask threshold_map(const Raster& prob, double t = 0.5);
std::pair<BinaryMask, BinaryMask> threshold_maps(const Raster& iris_prob, const Raster& pupil_prob, double t = 0.5);

/// Largest 8-connected component; equal sizes resolve to the component
/// whose first pixel in row-major order comes first.
BinaryMask largest_component(const BinaryMask& mask);

/// Fills background regions that do not touch the frame border.
BinaryMask fill_holes(const BinaryMask& mask);

struct FitReliability {
  double max_rms_residual = 2.0;
  double min_axis_ratio = 0.2;
};

struct RegressedEllipses {
  EllipseEncoding<double> iris;
  EllipseEncoding<double> pupil;
};

/// Refits both boundaries to the largest components; a fit that fails the
/// reliability test falls back to the regressed encoding, if any.
SegmentationResult refit_or_fallback(const BinaryMask& iris_mask, const BinaryMask& pupil_mask,
                                     const std::optional<RegressedEllipses>& regressed,
                                     const FitReliability& reliability = {});

/// pupil_mask &= iris_mask; flags the result degraded when more than half
/// of the pupil area was removed.
SegmentationResult enforce_containment(SegmentationResult result);

/// Iris-ellipse annulus pixels (outside the pupil ellipse) missing from the iris mask.
BinaryMask derived_occlusion(const SegmentationResult& seg);

struct LocalizerParams {
  double smooth_sigma = 2.5;
  double pupil_min_fraction = 0.08;
  double pupil_max_fraction = 0.30;
  double iris_min_ratio = 1.5;
  double iris_max_ratio = 4.0;
  /// Minimum fraction of angular sectors carrying boundary evidence.
  double min_support = 0.3;
  double edge_floor = 0.003;
};

/// Gradient-voting circular Hough search: dark pupil first, then the limbus
/// around it. Throws LocalizationError when no credible circle is found.
SegmentationResult classical_localize(const Raster& gray, const LocalizerParams& params = {});

}  // namespace viris
