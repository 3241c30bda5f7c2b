#include "viris/quality.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace viris {

std::string_view metric_name(QualityMetric m) {
  switch (m) {
    case QualityMetric::Overall: return "overall_quality";
    case QualityMetric::GrayscaleUtilization: return "grayscale_utilization";
    case QualityMetric::IrisPupilConcentricity: return "iris_pupil_concentricity";
    case QualityMetric::IrisPupilContrast: return "iris_pupil_contrast";
    case QualityMetric::IrisPupilRatio: return "iris_pupil_ratio";
    case QualityMetric::IrisScleraContrast: return "iris_sclera_contrast";
    case QualityMetric::MarginAdequacy: return "margin_adequacy";
    case QualityMetric::PupilCircularity: return "pupil_circularity";
    case QualityMetric::Sharpness: return "sharpness";
    case QualityMetric::UsableIrisArea: return "usable_iris_area";
  }
  return "overall_quality";
}

QualityMetric metric_from_name(std::string_view name) {
  for (auto m : kQualityMetrics)
    if (metric_name(m) == name) return m;
  throw ParameterError("unknown quality metric '" + std::string(name) + "'");
}

void QualityThresholds::validate() const {
  auto in = [](double v, double lo, double hi, const char* what) {
    if (!(v >= lo && v <= hi))
      throw ParameterError(std::string("threshold ") + what + " outside [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  };
  in(overall, 0, 100, "overall");
  in(grayscale_utilization, 0, 8, "grayscale_utilization");
  in(concentricity, 0, 100, "concentricity");
  in(iris_pupil_contrast, 0, 100, "iris_pupil_contrast");
  in(ratio_min, 0, 100, "ratio_min");
  in(ratio_max, 0, 100, "ratio_max");
  if (!(ratio_min < ratio_max)) throw ParameterError("ratio_min must be below ratio_max");
  in(iris_sclera_contrast, 0, 100, "iris_sclera_contrast");
  in(margin_adequacy, 0, 100, "margin_adequacy");
  in(pupil_circularity, 0, 100, "pupil_circularity");
  in(sharpness, 0, 100, "sharpness");
  in(usable_iris_area, 0, 100, "usable_iris_area");
}

double QualityThresholds::threshold(QualityMetric m) const {
  switch (m) {
    case QualityMetric::Overall: return overall;
    case QualityMetric::GrayscaleUtilization: return grayscale_utilization;
    case QualityMetric::IrisPupilConcentricity: return concentricity;
    case QualityMetric::IrisPupilContrast: return iris_pupil_contrast;
    case QualityMetric::IrisPupilRatio: return ratio_min;
    case QualityMetric::IrisScleraContrast: return iris_sclera_contrast;
    case QualityMetric::MarginAdequacy: return margin_adequacy;
    case QualityMetric::PupilCircularity: return pupil_circularity;
    case QualityMetric::Sharpness: return sharpness;
    case QualityMetric::UsableIrisArea: return usable_iris_area;
  }
  return 0.0;
}

bool QualityThresholds::passes(QualityMetric m, double score) const {
  if (m == QualityMetric::IrisPupilRatio && ratio_check == RatioCheck::Band)
    return score > ratio_min && score <= ratio_max;
  return score > threshold(m);
}

double weber_contrast(double bright, double dark) {
  return 100.0 * std::max(0.0, (bright - dark) / (bright + dark + 1.0 / 255.0));
}

namespace {

const Plane<double>& gray_plane(const Raster& gray) {
  if (gray.channels() != 1) throw ParameterError("quality metrics expect a single-channel raster");
  return gray.channel(0);
}

void require_geometry(const SegmentationResult& seg) {
  if (!seg.iris.valid() || !seg.pupil.valid()) throw QualityError("segmentation ellipses are not valid");
}

// Collects pixel intensities whose centres satisfy `keep(dx, dy)` around (cx, cy)
// within a square of half-size `reach`.
std::vector<double> collect(const Plane<double>& g, double cx, double cy, double reach,
                            const std::function<bool(double, double)>& keep) {
  std::vector<double> out;
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
  const int x1 = std::min(static_cast<int>(g.cols()) - 1, static_cast<int>(std::ceil(cx + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
  const int y1 = std::min(static_cast<int>(g.rows()) - 1, static_cast<int>(std::ceil(cy + reach)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (keep(x - cx, y - cy)) out.push_back(g(y, x));
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw QualityError("empty sampling band");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

}  // namespace

double grayscale_utilization(const Raster& gray, const SegmentationResult& seg) {
  const Plane<double>& g = gray_plane(gray);
  require_geometry(seg);
  const PointPx ext = seg.iris.half_extent();
  const int x0 = std::max(0, static_cast<int>(std::floor(seg.iris.cx - ext.x())));
  const int x1 = std::min(gray.width() - 1, static_cast<int>(std::ceil(seg.iris.cx + ext.x())));
  const int y0 = std::max(0, static_cast<int>(std::floor(seg.iris.cy - ext.y())));
  const int y1 = std::min(gray.height() - 1, static_cast<int>(std::ceil(seg.iris.cy + ext.y())));
  if (x1 < x0 || y1 < y0) throw QualityError("iris bounding region is empty");
  std::array<long, 256> hist{};
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) ++hist[std::clamp<long>(std::lround(g(y, x) * 255.0), 0, 255)];
  const double n = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
  double h = 0.0;
  for (long c : hist)
    if (c > 0) {
      const double p = c / n;
      h -= p * std::log2(p);
    }
  return std::max(0.0, h);
}

double iris_pupil_concentricity(const SegmentationResult& seg) {
  require_geometry(seg);
  const double r = seg.iris.mean_radius();
  if (!(r > 0.0)) throw QualityError("iris radius must be positive");
  const double offset = (seg.pupil.center() - seg.iris.center()).norm();
  return 100.0 * std::max(0.0, 1.0 - offset / r);
}

double iris_pupil_contrast(const Raster& gray, const SegmentationResult& seg) {
  const Plane<double>& g = gray_plane(gray);
  require_geometry(seg);
  const double rp = seg.pupil.mean_radius();
  const double ri = seg.iris.mean_radius();
  const double inner = 1.1 * rp;
  const double outer = std::min(1.5 * rp, 0.9 * ri);
  if (!(outer > inner)) throw QualityError("pupil nearly fills the iris; contrast bands are degenerate");
  const double cx = seg.pupil.cx, cy = seg.pupil.cy;
  auto pupil_px = collect(g, cx, cy, 0.8 * rp, [&](double dx, double dy) { return std::hypot(dx, dy) <= 0.8 * rp; });
  auto iris_px = collect(g, cx, cy, outer, [&](double dx, double dy) {
    const double r = std::hypot(dx, dy);
    return r >= inner && r <= outer;
  });
  if (pupil_px.empty() || iris_px.empty()) throw QualityError("iris-pupil sampling band lies outside the image");
  return weber_contrast(median(std::move(iris_px)), median(std::move(pupil_px)));
}

double iris_pupil_ratio(const SegmentationResult& seg) {
  require_geometry(seg);
  const double ri = seg.iris.mean_radius();
  if (!(ri > 0.0)) throw QualityError("iris radius must be positive");
  return std::clamp(100.0 * seg.pupil.mean_radius() / ri, 0.0, 100.0);
}

double iris_sclera_contrast(const Raster& gray, const SegmentationResult& seg) {
  const Plane<double>& g = gray_plane(gray);
  require_geometry(seg);
  const double ri = seg.iris.mean_radius();
  const double cx = seg.iris.cx, cy = seg.iris.cy;
  const double max_dev = std::numbers::pi / 6.0;
  auto lateral = [max_dev](double dx, double dy) {
    const double a = std::abs(std::atan2(dy, dx));
    return a <= max_dev || a >= std::numbers::pi - max_dev;
  };
  auto band = [&](double r0, double r1) {
    return collect(g, cx, cy, r1, [&, r0, r1](double dx, double dy) {
      const double r = std::hypot(dx, dy);
      return r >= r0 && r <= r1 && lateral(dx, dy);
    });
  };
  auto sclera_px = band(1.05 * ri, 1.25 * ri);
  auto iris_px = band(0.75 * ri, 0.95 * ri);
  if (sclera_px.empty()) throw QualityError("sclera sampling annulus lies outside the image");
  if (iris_px.empty()) throw QualityError("iris sampling annulus lies outside the image");
  return weber_contrast(median(std::move(sclera_px)), median(std::move(iris_px)));
}

double margin_adequacy(const SegmentationResult& seg) {
  require_geometry(seg);
  const double r = seg.iris.mean_radius();
  const PointPx ext = seg.iris.half_extent();
  const double w = seg.width(), h = seg.height();
  const double left = seg.iris.cx - ext.x();
  const double right = w - (seg.iris.cx + ext.x());
  const double top = seg.iris.cy - ext.y();
  const double bottom = h - (seg.iris.cy + ext.y());
  const double lateral = 0.6 * r, vertical = 0.2 * r;
  const double ratio = std::min({left / lateral, right / lateral, top / vertical, bottom / vertical});
  return 100.0 * std::clamp(ratio, 0.0, 1.0);
}

double pupil_circularity(const SegmentationResult& seg) {
  require_geometry(seg);
  if (!seg.pupil_mask.any()) throw QualityError("pupil mask is empty");
  const std::vector<PointPx> pts = mask_to_boundary_points(seg.pupil_mask);
  if (pts.size() < 32) throw QualityError("pupil contour has fewer than 32 points");

  std::vector<std::pair<double, double>> polar;
  polar.reserve(pts.size());
  for (const auto& p : pts) {
    const PointPx d = p - seg.pupil.center();
    polar.emplace_back(std::atan2(d.y(), d.x()), d.norm());
  }
  std::sort(polar.begin(), polar.end());

  constexpr int kAngles = 256;
  const double two_pi = 2.0 * std::numbers::pi;
  Eigen::ArrayXd radius(kAngles);
  std::size_t j = 0;
  for (int k = 0; k < kAngles; ++k) {
    const double theta = -std::numbers::pi + two_pi * k / kAngles;
    while (j < polar.size() && polar[j].first < theta) ++j;
    const auto& hi = polar[j % polar.size()];
    const auto& lo = polar[(j + polar.size() - 1) % polar.size()];
    const double a_lo = j == 0 ? lo.first - two_pi : lo.first;
    const double a_hi = j == polar.size() ? hi.first + two_pi : hi.first;
    const double t = a_hi > a_lo ? (theta - a_lo) / (a_hi - a_lo) : 0.0;
    radius(k) = lo.second + t * (hi.second - lo.second);
  }

  const double a0 = radius.mean();
  if (!(a0 > 0.0)) throw QualityError("pupil contour radius is zero");
  double energy = 0.0;
  for (int m = 2; m <= 8; ++m) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < kAngles; ++k) acc += radius(k) * std::polar(1.0, -two_pi * m * k / kAngles);
    const double amplitude = 2.0 * std::abs(acc) / kAngles;
    energy += amplitude * amplitude;
  }
  return 100.0 * std::max(0.0, 1.0 - std::sqrt(energy) / a0);
}

double iso_sharpness(const Raster& gray) {
  const double s = laplacian_sharpness_8bit(gray);
  return 100.0 * s * s / (s * s + 35.0 * 35.0);
}

double usable_iris_area(const SegmentationResult& seg) {
  return usable_iris_area(seg, BinaryMask::Constant(seg.height(), seg.width(), false));
}

double usable_iris_area(const SegmentationResult& seg, const BinaryMask& occlusion) {
  if (occlusion.rows() != seg.iris_mask.rows() || occlusion.cols() != seg.iris_mask.cols())
    throw ParameterError("occlusion mask dimensions differ from the segmentation");
  const BinaryMask annulus = seg.iris_mask && !seg.pupil_mask;
  const long total = annulus.count();
  if (total == 0) throw QualityError("iris annulus is empty");
  return 100.0 * static_cast<double>((annulus && !occlusion).count()) / static_cast<double>(total);
}

double sub_score(QualityMetric m, double score, const QualityThresholds& t) {
  switch (m) {
    case QualityMetric::GrayscaleUtilization: return std::clamp(12.5 * score, 0.0, 100.0);
    case QualityMetric::IrisPupilRatio: {
      const double half = 0.5 * (t.ratio_max - t.ratio_min);
      const double depth = std::min(score - t.ratio_min, t.ratio_max - score);
      return 100.0 * std::clamp(depth / half, 0.0, 1.0);
    }
    default: return std::clamp(score, 0.0, 100.0);
  }
}

double overall_quality(const QualityReport& report, const QualityThresholds& thresholds) {
  double worst = 100.0;
  for (auto m : kQualityMetrics) {
    if (m == QualityMetric::Overall) continue;
    const auto& r = report[m];
    if (!r.score) throw QualityError(std::string(metric_name(m)) + " is unavailable");
    worst = std::min(worst, sub_score(m, *r.score, thresholds));
  }
  return worst;
}

QualityReport assess(const Raster& gray, const SegmentationResult& seg, const QualityThresholds& thresholds) {
  return assess(gray, seg, thresholds, BinaryMask::Constant(seg.height(), seg.width(), false));
}

QualityReport assess(const Raster& gray_in, const SegmentationResult& seg, const QualityThresholds& thresholds,
                     const BinaryMask& occlusion) {
  const Raster gray = to_grayscale(gray_in);
  QualityReport report;
  auto run = [&](QualityMetric m, const std::function<double()>& f) {
    MetricResult& r = report[m];
    try {
      r.score = f();
      r.pass = thresholds.passes(m, *r.score);
    } catch (const std::exception& e) {
      r.score.reset();
      r.pass = false;
      r.diagnostic = e.what();
    }
  };
  run(QualityMetric::GrayscaleUtilization, [&] { return grayscale_utilization(gray, seg); });
  run(QualityMetric::IrisPupilConcentricity, [&] { return iris_pupil_concentricity(seg); });
  run(QualityMetric::IrisPupilContrast, [&] { return iris_pupil_contrast(gray, seg); });
  run(QualityMetric::IrisPupilRatio, [&] { return iris_pupil_ratio(seg); });
  run(QualityMetric::IrisScleraContrast, [&] { return iris_sclera_contrast(gray, seg); });
  run(QualityMetric::MarginAdequacy, [&] { return margin_adequacy(seg); });
  run(QualityMetric::PupilCircularity, [&] { return pupil_circularity(seg); });
  run(QualityMetric::Sharpness, [&] { return iso_sharpness(gray); });
  run(QualityMetric::UsableIrisArea, [&] { return usable_iris_area(seg, occlusion); });
  run(QualityMetric::Overall, [&] { return overall_quality(report, thresholds); });

  double lowest = 101.0;
  for (auto m : kQualityMetrics) {
    if (m == QualityMetric::Overall) continue;
    const auto& r = report[m];
    const double s = r.score ? sub_score(m, *r.score, thresholds) : -1.0;
    if (s < lowest) {
      lowest = s;
      report.limiting_metric = m;
    }
    if (!r.pass && !report.first_failure) report.first_failure = m;
  }
  if (!report[QualityMetric::Overall].pass && !report.first_failure) report.first_failure = QualityMetric::Overall;
  report.overall_pass = !report.first_failure.has_value();
  return report;
}

}  // namespace viris
