#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "viris/dataset.hpp"
#include "viris/quality.hpp"
#include "viris/raster.hpp"
#include "viris/segmenter.hpp"

namespace viris {

enum class FeedbackCode { AdjustGaze, AdjustDistance, OpenEyelids, HoldSteady, NoEyeDetected };

inline constexpr std::array<FeedbackCode, 5> kFeedbackCodes{
    FeedbackCode::AdjustGaze, FeedbackCode::AdjustDistance, FeedbackCode::OpenEyelids, FeedbackCode::HoldSteady,
    FeedbackCode::NoEyeDetected};

/// "ADJUST_GAZE", "ADJUST_DISTANCE", ...
std::string_view feedback_name(FeedbackCode f);
FeedbackCode feedback_from_name(std::string_view name);

/// Operator prompt for a failing quality metric.
FeedbackCode feedback_for(QualityMetric m);

struct SessionConfig {
  std::string subject;
  int session = 1;
  int target_per_eye = 8;
  double sharpness_gate = 70.0;
  QualityThresholds thresholds;
  /// Frame size the eye boxes in a stream refer to.
  int detector_width = 640;
  int detector_height = 360;
  int crop_width = 640;
  int crop_height = 480;
  LocalizerParams localizer;

  void validate() const;
};

struct Accept {
  SampleId sample;
  std::string saved_path;
  Raster crop;
  double sharpness = 0.0;
  QualityReport report;
};

struct Reject {
  FeedbackCode feedback = FeedbackCode::NoEyeDetected;
  std::optional<QualityMetric> failing_metric;
  std::string detail;
};

using GateDecision = std::variant<Accept, Reject>;

/// Eye region for a frame without a detector box: an iris-centred window of
/// the crop size at native resolution, enlarged only when a 4r x 3r view of
/// the iris would not fit.
BBox locate_eye(const Raster& gray, int crop_width, int crop_height, const LocalizerParams& params = {});

/// Remap, crop, sharpness gate, segmentation, then ISO assessment; the
/// first failing stage decides the rejection.
GateDecision gate_frame(const Raster& frame, const std::optional<BBox>& eye_bbox, const SessionConfig& cfg, Eye eye,
                        int next_trial);

struct AcceptedSample {
  SampleId sample;
  std::string path;
};

struct FrameOutcome {
  std::string frame;
  std::optional<std::string> accepted;
  std::optional<FeedbackCode> feedback;
  std::optional<QualityMetric> failing_metric;
};

struct SessionResult {
  std::vector<AcceptedSample> accepted;
  std::size_t frames_processed = 0;
  bool complete = false;
  std::map<FeedbackCode, std::size_t> rejection_histogram;
  std::vector<FrameOutcome> frames;
};

/// Loads a frame; throw to signal an unreadable frame.
using FrameLoader = std::function<Raster(const std::string& path)>;
/// Receives each accepted crop in order, for persistence.
using AcceptSink = std::function<void(const Accept&)>;

SessionResult run_session(const FrameStream& stream, const SessionConfig& cfg, const FrameLoader& load,
                          const AcceptSink& sink = {});

}  // namespace viris
