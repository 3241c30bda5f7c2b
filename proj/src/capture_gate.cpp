#include "viris/capture_gate.hpp"

#include <algorithm>

namespace viris {

std::string_view feedback_name(FeedbackCode f) {
  switch (f) {
    case FeedbackCode::AdjustGaze: return "ADJUST_GAZE";
    case FeedbackCode::AdjustDistance: return "ADJUST_DISTANCE";
    case FeedbackCode::OpenEyelids: return "OPEN_EYELIDS";
    case FeedbackCode::HoldSteady: return "HOLD_STEADY";
    case FeedbackCode::NoEyeDetected: return "NO_EYE_DETECTED";
  }
  return "NO_EYE_DETECTED";
}

FeedbackCode feedback_from_name(std::string_view name) {
  for (auto f : kFeedbackCodes)
    if (feedback_name(f) == name) return f;
  throw ParameterError("unknown feedback code '" + std::string(name) + "'");
}

FeedbackCode feedback_for(QualityMetric m) {
  switch (m) {
    case QualityMetric::Sharpness: return FeedbackCode::HoldSteady;
    case QualityMetric::MarginAdequacy:
    case QualityMetric::IrisPupilConcentricity:
    case QualityMetric::PupilCircularity: return FeedbackCode::AdjustGaze;
    case QualityMetric::IrisPupilRatio:
    case QualityMetric::UsableIrisArea: return FeedbackCode::OpenEyelids;
    case QualityMetric::IrisPupilContrast:
    case QualityMetric::IrisScleraContrast:
    case QualityMetric::GrayscaleUtilization:
    case QualityMetric::Overall: return FeedbackCode::AdjustDistance;
  }
  return FeedbackCode::AdjustDistance;
}

void SessionConfig::validate() const {
  if (target_per_eye < 1) throw ParameterError("target_per_eye must be at least 1");
  if (!(sharpness_gate > 0.0)) throw ParameterError("sharpness_gate must be positive");
  if (detector_width < 1 || detector_height < 1) throw ParameterError("detector frame size must be positive");
  if (crop_width < 1 || crop_height < 1) throw ParameterError("crop size must be positive");
  if (session < 1) throw ParameterError("session must be at least 1");
  thresholds.validate();
}

BBox locate_eye(const Raster& gray, int crop_width, int crop_height, const LocalizerParams& params) {
  if (crop_width < 1 || crop_height < 1) throw ParameterError("crop size must be positive");
  const SegmentationResult seg = classical_localize(gray, params);
  const double r = seg.iris.mean_radius();
  const double scale = std::max({1.0, 4.0 * r / crop_width, 3.0 * r / crop_height});
  const double w = crop_width * scale, h = crop_height * scale;
  double x0 = seg.iris.cx - w / 2.0, y0 = seg.iris.cy - h / 2.0;
  if (scale == 1.0) {
    x0 = std::round(x0);
    y0 = std::round(y0);
  }
  return {x0, y0, w, h};
}

GateDecision gate_frame(const Raster& frame, const std::optional<BBox>& eye_bbox, const SessionConfig& cfg, Eye eye,
                        int next_trial) {
  try {
    const Raster gray_frame = to_grayscale(frame);
    BBox roi;
    if (eye_bbox) {
      roi = remap_bbox(*eye_bbox,
                       scale_factors(frame.width(), frame.height(), cfg.detector_width, cfg.detector_height));
    } else {
      roi = locate_eye(gray_frame, cfg.crop_width, cfg.crop_height, cfg.localizer);
    }
    const Raster crop = crop_standardize(frame, roi, cfg.crop_width, cfg.crop_height);
    const Raster gray = to_grayscale(crop);

    const double s = laplacian_sharpness_8bit(gray);
    if (s < cfg.sharpness_gate)
      return Reject{FeedbackCode::HoldSteady, QualityMetric::Sharpness,
                    "sharpness " + std::to_string(s) + " below gate"};

    const SegmentationResult seg = classical_localize(gray, cfg.localizer);
    QualityReport report = assess(gray, seg, cfg.thresholds);
    if (!report.overall_pass) {
      QualityMetric m = *report.first_failure;
      if (m == QualityMetric::Overall && report.limiting_metric) m = *report.limiting_metric;
      return Reject{feedback_for(m), *report.first_failure, std::string(metric_name(*report.first_failure))};
    }
    const SampleId id{cfg.subject, eye, cfg.session, next_trial};
    return Accept{id, format_filename(id), crop, s, std::move(report)};
  } catch (const LocalizationError& e) {
    return Reject{FeedbackCode::NoEyeDetected, std::nullopt, e.what()};
  } catch (const ParameterError& e) {
    return Reject{FeedbackCode::NoEyeDetected, std::nullopt, e.what()};
  }
}

SessionResult run_session(const FrameStream& stream, const SessionConfig& cfg_in, const FrameLoader& load,
                          const AcceptSink& sink) {
  SessionConfig cfg = cfg_in;
  if (cfg.subject.empty()) cfg.subject = stream.subject;
  cfg.session = stream.session;
  cfg.validate();

  SessionResult result;
  for (auto f : kFeedbackCodes) result.rejection_histogram[f] = 0;
  int trial = 1;
  for (const FrameRecord& rec : stream.frames) {
    if (static_cast<int>(result.accepted.size()) >= cfg.target_per_eye) break;
    ++result.frames_processed;
    FrameOutcome outcome{rec.path, std::nullopt, std::nullopt, std::nullopt};
    GateDecision decision = Reject{FeedbackCode::NoEyeDetected, std::nullopt, "unreadable frame"};
    try {
      const Raster frame = load(rec.path);
      decision = gate_frame(frame, rec.eye_bbox, cfg, stream.eye, trial);
    } catch (const std::exception&) {
    }
    if (auto* acc = std::get_if<Accept>(&decision)) {
      if (sink) sink(*acc);
      result.accepted.push_back({acc->sample, acc->saved_path});
      outcome.accepted = acc->saved_path;
      ++trial;
    } else {
      const auto& rej = std::get<Reject>(decision);
      ++result.rejection_histogram[rej.feedback];
      outcome.feedback = rej.feedback;
      outcome.failing_metric = rej.failing_metric;
    }
    result.frames.push_back(std::move(outcome));
  }
  result.complete = static_cast<int>(result.accepted.size()) == cfg.target_per_eye;
  return result;
}

}  // namespace viris
