#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "viris/config.hpp"

using namespace viris;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / ("viris_config_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("defaults round-trip through JSON") {
  const ToolkitConfig d;
  CHECK_NOTHROW(d.validate());
  const ToolkitConfig back = parse_config(serialize_config(d));
  CHECK(serialize_config(back) == serialize_config(d));
  CHECK(back.quality.sharpness == 80.0);
  CHECK(back.sharpness_gate == 70.0);
  CHECK(back.grid.cols == 336);
  CHECK(back.bank.wavelengths == std::vector<double>{18, 36, 72});
  CHECK(back.match.max_shift == 14);
  CHECK(back.far_targets == std::vector<double>{0.01, 0.0001});
  CHECK(back.max_eer == 0.05);
  CHECK_FALSE(back.cross_eye_impostors);
  CHECK(parse_config("{}").det_points == 200);
}

TEST_CASE("partial configs override only the keys given") {
  const ToolkitConfig c = parse_config(R"({"quality": {"sharpness": 60, "iris_pupil_ratio_check": "lower_bound"},
                                           "iriscode": {"max_shift": 10}, "evaluation": {"max_eer": 0.1}})");
  CHECK(c.quality.sharpness == 60.0);
  CHECK(c.quality.ratio_check == RatioCheck::LowerBound);
  CHECK(c.quality.overall == 70.0);
  CHECK(c.match.max_shift == 10);
  CHECK(c.max_eer == 0.1);
  const SessionConfig s = c.session_config("17", 2);
  CHECK(s.subject == "17");
  CHECK(s.session == 2);
  CHECK(s.thresholds.sharpness == 60.0);
  CHECK(s.target_per_eye == 8);
}

TEST_CASE("bad configs are rejected with the offending field") {
  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ParseError& e) {
      return e.field();
    }
    return std::string("<accepted>");
  };
  CHECK(field_of(R"({"quality": {"sharpnes": 80}})") == "quality.sharpnes");
  CHECK(field_of(R"({"bogus": {}})") == "bogus");
  CHECK(field_of(R"({"iriscode": {"grid_cols": "wide"}})") == "iriscode.grid_cols");
  CHECK(field_of(R"({"quality": {"iris_pupil_ratio_check": "sometimes"}})") == "quality.iris_pupil_ratio_check");
  CHECK(field_of(R"({"capture": 3})") == "capture");
  CHECK(field_of("not json") == "config");
  CHECK(field_of("[1, 2]") == "config");
  CHECK_THROWS_AS(parse_config(R"({"iriscode": {"wavelengths": [36, 18]}})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"quality": {"sharpness": 120}})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"iriscode": {"grid_rows": 7}})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"evaluation": {"far_targets": [0]}})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"evaluation": {"det_points": 2}})"), ParameterError);
}

TEST_CASE("missing config file is created with defaults") {
  const fs::path dir = scratch_dir("create");
  const fs::path p = dir / "nested" / "viris.json";
  const ToolkitConfig c = load_or_create_config(p);
  REQUIRE(fs::exists(p));
  CHECK(slurp(p) == serialize_config(ToolkitConfig{}));
  CHECK(c.grid.cols == 336);

  std::ofstream(p) << R"({"capture": {"target_per_eye": 3}})";
  CHECK(load_or_create_config(p).target_per_eye == 3);
  fs::remove_all(dir.parent_path());
}

TEST_CASE("config path resolution falls back to the environment") {
  ::unsetenv("VIRIS_CONFIG");
  CHECK_FALSE(resolve_config_path(std::nullopt).has_value());
  CHECK(resolve_config_path(std::string("a.json")) == fs::path("a.json"));
  ::setenv("VIRIS_CONFIG", "/tmp/env.json", 1);
  CHECK(resolve_config_path(std::nullopt) == fs::path("/tmp/env.json"));
  CHECK(resolve_config_path(std::string("b.json")) == fs::path("b.json"));
  CHECK(resolve_config_path(std::string("")) == fs::path("/tmp/env.json"));
  ::unsetenv("VIRIS_CONFIG");
}
