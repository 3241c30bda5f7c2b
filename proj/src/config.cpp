#include "viris/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace viris {

using nlohmann::json;

void ToolkitConfig::validate() const {
  quality.validate();
  session_config("0", 1).validate();
  strip.validate();
  if (!(gamma > 0.0 && gamma <= 10.0)) throw ParameterError("gamma must lie in (0, 10]");
  grid.validate(strip);
  build_bank(grid, bank);
  if (match.max_shift < 0 || match.max_shift >= grid.cols) throw ParameterError("max_shift out of range");
  if (!(match.min_bits_fraction >= 0.0 && match.min_bits_fraction <= 1.0))
    throw ParameterError("min_bits_fraction must lie in [0, 1]");
  for (double f : far_targets)
    if (!(f > 0.0 && f <= 1.0)) throw ParameterError("far targets must lie in (0, 1]");
  if (det_points < 3) throw ParameterError("det_points must be at least 3");
  if (!(max_eer >= 0.0 && max_eer <= 1.0)) throw ParameterError("max_eer must lie in [0, 1]");
}

SessionConfig ToolkitConfig::session_config(const std::string& subject, int session) const {
  SessionConfig s;
  s.subject = subject;
  s.session = session;
  s.target_per_eye = target_per_eye;
  s.sharpness_gate = sharpness_gate;
  s.thresholds = quality;
  s.detector_width = detector_width;
  s.detector_height = detector_height;
  s.crop_width = crop_width;
  s.crop_height = crop_height;
  return s;
}

std::string serialize_config(const ToolkitConfig& c) {
  const QualityThresholds& q = c.quality;
  json j;
  j["quality"] = {{"overall", q.overall},
                  {"grayscale_utilization", q.grayscale_utilization},
                  {"iris_pupil_concentricity", q.concentricity},
                  {"iris_pupil_contrast", q.iris_pupil_contrast},
                  {"iris_pupil_ratio_min", q.ratio_min},
                  {"iris_pupil_ratio_max", q.ratio_max},
                  {"iris_pupil_ratio_check", q.ratio_check == RatioCheck::Band ? "band" : "lower_bound"},
                  {"iris_sclera_contrast", q.iris_sclera_contrast},
                  {"margin_adequacy", q.margin_adequacy},
                  {"pupil_circularity", q.pupil_circularity},
                  {"sharpness", q.sharpness},
                  {"usable_iris_area", q.usable_iris_area}};
  j["capture"] = {{"sharpness_gate", c.sharpness_gate},   {"target_per_eye", c.target_per_eye},
                  {"detector_width", c.detector_width},   {"detector_height", c.detector_height},
                  {"crop_width", c.crop_width},           {"crop_height", c.crop_height}};
  j["normalize"] = {{"strip_width", c.strip.width}, {"strip_height", c.strip.height}, {"gamma", c.gamma}};
  j["iriscode"] = {{"grid_rows", c.grid.rows},
                   {"grid_cols", c.grid.cols},
                   {"wavelengths", c.bank.wavelengths},
                   {"sigma_ratio", c.bank.sigma_ratio},
                   {"max_shift", c.match.max_shift},
                   {"min_bits_fraction", c.match.min_bits_fraction}};
  j["evaluation"] = {{"far_targets", c.far_targets},
                     {"cross_eye_impostors", c.cross_eye_impostors},
                     {"det_points", c.det_points},
                     {"max_eer", c.max_eer}};
  return j.dump(2) + "\n";
}

namespace {

template <typename T>
void read(const json& section, const std::string& path, std::set<std::string>& seen, const char* key, T& out) {
  seen.insert(key);
  if (!section.contains(key)) return;
  try {
    out = section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(path + "." + key, e.what());
  }
}

void reject_unknown(const json& section, const std::string& path, const std::set<std::string>& seen) {
  if (!section.is_object()) throw ParseError(path, "expected an object");
  for (const auto& [k, v] : section.items())
    if (!seen.count(k)) throw ParseError(path + "." + k, "unknown key");
}

}  // namespace

ToolkitConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("config", e.what());
  }
  if (!j.is_object()) throw ParseError("config", "expected an object");
  ToolkitConfig c;
  std::set<std::string> top;
  auto section = [&](const char* name, auto&& body) {
    top.insert(name);
    if (!j.contains(name)) return;
    const json& s = j.at(name);
    if (!s.is_object()) throw ParseError(name, "expected an object");
    std::set<std::string> seen;
    body(s, std::string(name), seen);
    reject_unknown(s, name, seen);
  };
  section("quality", [&](const json& s, const std::string& p, std::set<std::string>& seen) {
    QualityThresholds& q = c.quality;
    read(s, p, seen, "overall", q.overall);
    read(s, p, seen, "grayscale_utilization", q.grayscale_utilization);
    read(s, p, seen, "iris_pupil_concentricity", q.concentricity);
    read(s, p, seen, "iris_pupil_contrast", q.iris_pupil_contrast);
    read(s, p, seen, "iris_pupil_ratio_min", q.ratio_min);
    read(s, p, seen, "iris_pupil_ratio_max", q.ratio_max);
    std::string check = q.ratio_check == RatioCheck::Band ? "band" : "lower_bound";
    read(s, p, seen, "iris_pupil_ratio_check", check);
    if (check == "band")
      q.ratio_check = RatioCheck::Band;
    else if (check == "lower_bound")
      q.ratio_check = RatioCheck::LowerBound;
    else
      throw ParseError(p + ".iris_pupil_ratio_check", "expected 'band' or 'lower_bound'");
    read(s, p, seen, "iris_sclera_contrast", q.iris_sclera_contrast);
    read(s, p, seen, "margin_adequacy", q.margin_adequacy);
    read(s, p, seen, "pupil_circularity", q.pupil_circularity);
    read(s, p, seen, "sharpness", q.sharpness);
    read(s, p, seen, "usable_iris_area", q.usable_iris_area);
  });
  section("capture", [&](const json& s, const std::string& p, std::set<std::string>& seen) {
    read(s, p, seen, "sharpness_gate", c.sharpness_gate);
    read(s, p, seen, "target_per_eye", c.target_per_eye);
    read(s, p, seen, "detector_width", c.detector_width);
    read(s, p, seen, "detector_height", c.detector_height);
    read(s, p, seen, "crop_width", c.crop_width);
    read(s, p, seen, "crop_height", c.crop_height);
  });
  section("normalize", [&](const json& s, const std::string& p, std::set<std::string>& seen) {
    read(s, p, seen, "strip_width", c.strip.width);
    read(s, p, seen, "strip_height", c.strip.height);
    read(s, p, seen, "gamma", c.gamma);
  });
  section("iriscode", [&](const json& s, const std::string& p, std::set<std::string>& seen) {
    read(s, p, seen, "grid_rows", c.grid.rows);
    read(s, p, seen, "grid_cols", c.grid.cols);
    read(s, p, seen, "wavelengths", c.bank.wavelengths);
    read(s, p, seen, "sigma_ratio", c.bank.sigma_ratio);
    read(s, p, seen, "max_shift", c.match.max_shift);
    read(s, p, seen, "min_bits_fraction", c.match.min_bits_fraction);
  });
  section("evaluation", [&](const json& s, const std::string& p, std::set<std::string>& seen) {
    read(s, p, seen, "far_targets", c.far_targets);
    read(s, p, seen, "cross_eye_impostors", c.cross_eye_impostors);
    read(s, p, seen, "det_points", c.det_points);
    read(s, p, seen, "max_eer", c.max_eer);
  });
  for (const auto& [k, v] : j.items())
    if (!top.count(k)) throw ParseError(k, "unknown section");
  c.validate();
  return c;
}

ToolkitConfig load_or_create_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    const ToolkitConfig defaults;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create config file " + path.string());
    out << serialize_config(defaults);
    return defaults;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& explicit_path) {
  if (explicit_path && !explicit_path->empty()) return std::filesystem::path(*explicit_path);
  if (const char* env = std::getenv("VIRIS_CONFIG"); env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

}  // namespace viris
