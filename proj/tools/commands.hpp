#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "viris/config.hpp"
#include "viris/evaluation.hpp"

namespace viris::cli {

/// Process exit statuses.
enum Status : int { kOk = 0, kError = 1, kPolicyFail = 2 };

struct Context {
  ToolkitConfig config;
  std::filesystem::path out_dir = ".";
  std::optional<std::filesystem::path> manifest;
  int jobs = 1;
};

int cmd_quality(const Context& ctx, const std::filesystem::path& image, const std::optional<std::filesystem::path>& seg);
int cmd_gate(const Context& ctx, const std::filesystem::path& session);
int cmd_segment(const Context& ctx);
int cmd_normalize(const Context& ctx);
int cmd_encode(const Context& ctx);
int cmd_match(const Context& ctx, const std::filesystem::path& templates_dir);
int cmd_eval(const Context& ctx, const std::filesystem::path& scores_csv);
int cmd_seg_eval(const Context& ctx, const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir);

/// DET plot on normal-deviate axes; the EER point carries id="eer-marker".
std::string det_svg(const VerificationReport& report);

}  // namespace viris::cli
