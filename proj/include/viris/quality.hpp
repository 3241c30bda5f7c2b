#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "viris/raster.hpp"
#include "viris/segmenter.hpp"

namespace viris {

/// ISO/IEC 29794-6 quality metrics in report order
/// (the aggregate first).
enum class QualityMetric {
  Overall,
  GrayscaleUtilization,
  IrisPupilConcentricity,
  IrisPupilContrast,
  IrisPupilRatio,
  IrisScleraContrast,
  MarginAdequacy,
  PupilCircularity,
  Sharpness,
  UsableIrisArea,
};

inline constexpr std::size_t kQualityMetricCount = 10;

inline constexpr std::array<QualityMetric, kQualityMetricCount> kQualityMetrics{
    QualityMetric::Overall,           QualityMetric::GrayscaleUtilization, QualityMetric::IrisPupilConcentricity,
    QualityMetric::IrisPupilContrast, QualityMetric::IrisPupilRatio,       QualityMetric::IrisScleraContrast,
    QualityMetric::MarginAdequacy,    QualityMetric::PupilCircularity,     QualityMetric::Sharpness,
    QualityMetric::UsableIrisArea,
};

std::string_view metric_name(QualityMetric m);
QualityMetric metric_from_name(std::string_view name);

enum class RatioCheck { Band, LowerBound };

/// Pass thresholds; every metric passes when its score is strictly above
/// its threshold, except the pupil/iris ratio in Band mode, which must lie
/// in (ratio_min, ratio_max].
struct QualityThresholds {
  double overall = 70.0;
  double grayscale_utilization = 6.0;
  double concentricity = 90.0;
  double iris_pupil_contrast = 30.0;
  double ratio_min = 20.0;
  double ratio_max = 70.0;
  RatioCheck ratio_check = RatioCheck::Band;
  double iris_sclera_contrast = 5.0;
  double margin_adequacy = 80.0;
  double pupil_circularity = 70.0;
  double sharpness = 80.0;
  double usable_iris_area = 70.0;

  /// Throws ParameterError for a threshold outside its metric's range.
  void validate() const;
  /// Lower pass bound for `m`.
  double threshold(QualityMetric m) const;
  bool passes(QualityMetric m, double score) const;
};

struct MetricResult {
  std::optional<double> score;
  bool pass = false;
  std::string diagnostic;
};

struct QualityReport {
  std::array<MetricResult, kQualityMetricCount> metrics{};
  bool overall_pass = false;
  /// First failing component in table order; the aggregate is checked last.
  std::optional<QualityMetric> first_failure;
  /// Component with the lowest normalised sub-score.
  std::optional<QualityMetric> limiting_metric;

  const MetricResult& operator[](QualityMetric m) const { return metrics[static_cast<std::size_t>(m)]; }
  MetricResult& operator[](QualityMetric m) { return metrics[static_cast<std::size_t>(m)]; }
};

/// 100 * max(0, (bright - dark) / (bright + dark + 1/255)).
double weber_contrast(double bright, double dark);

/// Shannon entropy (bits) of the 256-bin histogram inside the iris bounding box.
double grayscale_utilization(const Raster& gray, const SegmentationResult& seg);
double iris_pupil_concentricity(const SegmentationResult& seg);
double iris_pupil_contrast(const Raster& gray, const SegmentationResult& seg);
double iris_pupil_ratio(const SegmentationResult& seg);
double iris_sclera_contrast(const Raster& gray, const SegmentationResult& seg);
double margin_adequacy(const SegmentationResult& seg);
/// Low-order harmonic content (2..8) of the pupil contour radius.
double pupil_circularity(const SegmentationResult& seg);
/// Saturating map of the 8-bit Laplacian sharpness: 100 S^2 / (S^2 + 35^2).
double iso_sharpness(const Raster& gray);
double usable_iris_area(const SegmentationResult& seg);
double usable_iris_area(const SegmentationResult& seg, const BinaryMask& occlusion);

/// Normalised [0, 100] sub-score used by the aggregate.
double sub_score(QualityMetric m, double score, const QualityThresholds& thresholds);

/// Minimum sub-score over the nine components; throws QualityError if any
/// component is missing.
double overall_quality(const QualityReport& report, const QualityThresholds& thresholds);

QualityReport assess(const Raster& gray, const SegmentationResult& seg, const QualityThresholds& thresholds);
QualityReport assess(const Raster& gray, const SegmentationResult& seg, const QualityThresholds& thresholds,
                     const BinaryMask& occlusion);

}  // namespace viris
