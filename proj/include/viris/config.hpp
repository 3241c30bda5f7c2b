#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "viris/capture_gate.hpp"
#include "viris/iriscode.hpp"
#include "viris/normalize.hpp"
#include "viris/quality.hpp"

namespace viris {

struct ToolkitConfig {
  QualityThresholds quality;

  double sharpness_gate = 70.0;
  int target_per_eye = 8;
  int detector_width = 640;
  int detector_height = 360;
  int crop_width = 640;
  int crop_height = 480;

  StripGeometry strip;
  double gamma = 0.7;

  CodeGrid grid;
  FilterBankParams bank;
  MatchPolicy match;

  std::vector<double> far_targets{0.01, 0.0001};
  bool cross_eye_impostors = false;
  int det_points = 200;
  /// Verification policy: eval fails when the EER exceeds this.
  double max_eer = 0.05;

  void validate() const;
  SessionConfig session_config(const std::string& subject, int session) const;
};

std::string serialize_config(const ToolkitConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ToolkitConfig parse_config(const std::string& json_text);

/// Reads `path`; when the file does not exist it is created with every
/// default written out.
ToolkitConfig load_or_create_config(const std::filesystem::path& path);

/// Explicit path, else $VIRIS_CONFIG, else none.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& explicit_path);

}  // namespace viris
