#pragma once

#include <json.hpp>

#include "viris/capture_gate.hpp"
#include "viris/evaluation.hpp"
#include "viris/quality.hpp"
#include "viris/segmenter.hpp"

namespace viris {

nlohmann::json ellipse_json(const Ellipse<double>& e);
Ellipse<double> ellipse_from_json(const nlohmann::json& j);

/// Per metric {score, threshold, pass}; the ratio band adds threshold_max.
nlohmann::json quality_json(const QualityReport& r, const QualityThresholds& thresholds);

/// Geometry only; masks travel as PNGs alongside.
nlohmann::json segmentation_json(const SegmentationResult& seg);
/// Rebuilds a result of the given frame size, rasterizing masks from the ellipses.
SegmentationResult segmentation_from_json(const nlohmann::json& j, int width, int height);

nlohmann::json session_json(const SessionResult& r);
nlohmann::json verification_json(const VerificationReport& r);
nlohmann::json seg_eval_json(const SegEvalReport& r);

/// Two-space indentation and a trailing newline.
std::string to_text(const nlohmann::json& j);

}  // namespace viris
