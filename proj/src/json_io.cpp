#include "viris/json_io.hpp"

#include <cmath>

namespace viris {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(); }

}  // namespace

json ellipse_json(const Ellipse<double>& e) {
  return {{"cx", e.cx}, {"cy", e.cy}, {"rx", e.rx}, {"ry", e.ry}, {"alpha", e.alpha}};
}

Ellipse<double> ellipse_from_json(const json& j) {
  Ellipse<double> e;
  try {
    e = {j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("rx").get<double>(), j.at("ry").get<double>(),
         j.value("alpha", 0.0)};
  } catch (const json::exception& ex) {
    throw ParseError("ellipse", ex.what());
  }
  if (!e.valid()) throw ParseError("ellipse", "ellipse parameters are not valid");
  return e;
}

json quality_json(const QualityReport& r, const QualityThresholds& t) {
  json metrics = json::object();
  for (auto m : kQualityMetrics) {
    const MetricResult& res = r[m];
    json entry = {{"score", res.score ? number(*res.score) : json()}, {"threshold", t.threshold(m)}, {"pass", res.pass}};
    if (m == QualityMetric::IrisPupilRatio && t.ratio_check == RatioCheck::Band) entry["threshold_max"] = t.ratio_max;
    if (!res.diagnostic.empty()) entry["diagnostic"] = res.diagnostic;
    metrics[std::string(metric_name(m))] = entry;
  }
  json j = {{"overall_pass", r.overall_pass}, {"metrics", metrics}};
  j["first_failure"] = r.first_failure ? json(std::string(metric_name(*r.first_failure))) : json();
  j["limiting_metric"] = r.limiting_metric ? json(std::string(metric_name(*r.limiting_metric))) : json();
  return j;
}

json segmentation_json(const SegmentationResult& seg) {
  return {{"width", seg.width()},
          {"height", seg.height()},
          {"iris", ellipse_json(seg.iris)},
          {"pupil", ellipse_json(seg.pupil)},
          {"source", std::string(source_name(seg.source))},
          {"degraded", seg.degraded}};
}

SegmentationResult segmentation_from_json(const json& j, int width, int height) {
  if (!j.is_object() || !j.contains("iris") || !j.contains("pupil"))
    throw ParseError("segmentation", "expected iris and pupil ellipses");
  SegmentationResult seg;
  seg.iris = ellipse_from_json(j.at("iris"));
  seg.pupil = ellipse_from_json(j.at("pupil"));
  try {
    if (j.contains("source")) seg.source = source_from_name(j.at("source").get<std::string>());
    seg.degraded = j.value("degraded", false);
  } catch (const json::exception& ex) {
    throw ParseError("segmentation", ex.what());
  } catch (const ParameterError& ex) {
    throw ParseError("source", ex.what());
  }
  seg.pupil_mask = rasterize_ellipse(seg.pupil, width, height);
  seg.iris_mask = rasterize_ellipse(seg.iris, width, height) || seg.pupil_mask;
  return seg;
}

json session_json(const SessionResult& r) {
  json accepted = json::array();
  for (const auto& a : r.accepted) accepted.push_back({{"sample", sample_stem(a.sample)}, {"path", a.path}});
  json hist = json::object();
  for (const auto& [code, n] : r.rejection_histogram) hist[std::string(feedback_name(code))] = n;
  json frames = json::array();
  for (const auto& f : r.frames) {
    json e = {{"frame", f.frame}};
    if (f.accepted) {
      e["decision"] = "accept";
      e["saved_path"] = *f.accepted;
    } else {
      e["decision"] = "reject";
      e["feedback"] = f.feedback ? json(std::string(feedback_name(*f.feedback))) : json();
      e["failing_metric"] = f.failing_metric ? json(std::string(metric_name(*f.failing_metric))) : json();
    }
    frames.push_back(e);
  }
  return {{"accepted", accepted},
          {"frames_processed", r.frames_processed},
          {"complete", r.complete},
          {"rejection_histogram", hist},
          {"frames", frames}};
}

json verification_json(const VerificationReport& r) {
  json tars = json::array();
  for (const auto& t : r.tar_at_far)
    tars.push_back({{"far", t.far_target},
                    {"tar", t.tar},
                    {"threshold", number(t.threshold)},
                    {"achieved_fmr", t.achieved_fmr},
                    {"flagged", t.flagged}});
  json det = json::array();
  for (const auto& p : r.det_points) det.push_back({{"threshold", number(p.threshold)}, {"fmr", p.fmr}, {"fnmr", p.fnmr}});
  return {{"n_genuine", r.n_genuine},
          {"n_impostor", r.n_impostor},
          {"eer", r.eer},
          {"eer_threshold", number(r.eer_threshold)},
          {"tar_at_far", tars},
          {"auc", r.auc},
          {"dprime", number(r.stats.dprime)},
          {"gmean", r.stats.gmean},
          {"gstd", r.stats.gstd},
          {"imean", r.stats.imean},
          {"istd", r.stats.istd},
          {"zero_fmr", r.zero_fmr},
          {"zero_fnmr", r.zero_fnmr},
          {"fmr_resolution", r.fmr_resolution},
          {"fnmr_resolution", r.fnmr_resolution},
          {"det_points", det}};
}

json seg_eval_json(const SegEvalReport& r) {
  auto cls = [](const ClassScores& c) { return json{{"iou", c.iou}, {"dice", c.dice}, {"e1", c.e1}}; };
  json rows = json::array();
  for (const auto& row : r.rows) {
    json e = {{"name", row.name}};
    if (!row.error.empty()) e["error"] = row.error;
    if (row.iris) e["iris"] = cls(*row.iris);
    if (row.pupil) e["pupil"] = cls(*row.pupil);
    rows.push_back(e);
  }
  return {{"evaluated", r.evaluated}, {"iris", cls(r.iris)}, {"pupil", cls(r.pupil)}, {"rows", rows}};
}

std::string to_text(const json& j) { return j.dump(2) + "\n"; }

}  // namespace viris
