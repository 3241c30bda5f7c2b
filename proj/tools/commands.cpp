#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "viris/json_io.hpp"
#include "viris/png_io.hpp"

namespace viris::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs f(0..n-1) on up to `jobs` threads. Callers store results by index so
// output order does not depend on scheduling.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<ManifestEntry> require_manifest(const Context& ctx) {
  if (!ctx.manifest) throw ParameterError("this command needs --manifest");
  return load_manifest(*ctx.manifest);
}

struct Loaded {
  Raster image;
  SegmentationResult seg;
};

// External masks are refit when both load; otherwise the image is localized.
Loaded segment_entry(const ManifestEntry& e, const ToolkitConfig&) {
  Raster image = load_png(e.image_path);
  if (e.iris_mask_path && e.pupil_mask_path) {
    try {
      const BinaryMask iris = load_mask_png(*e.iris_mask_path);
      const BinaryMask pupil = load_mask_png(*e.pupil_mask_path);
      if (iris.cols() != image.width() || iris.rows() != image.height() || pupil.cols() != image.width() ||
          pupil.rows() != image.height())
        throw ParameterError("mask dimensions differ from the image");
      return {std::move(image), refit_or_fallback(iris, pupil, std::nullopt)};
    } catch (const std::exception&) {
    }
  }
  SegmentationResult seg = classical_localize(image);
  return {std::move(image), std::move(seg)};
}

NormalizedStrip strip_for(const Loaded& l, const ToolkitConfig& cfg) {
  NormalizedStrip strip = rubber_sheet(l.image, l.seg, derived_occlusion(l.seg), cfg.strip);
  if (strip.texture.channels() == 3) strip = enhance_strip(strip, cfg.gamma);
  return strip;
}

struct SampleOutcome {
  std::string stem;
  std::string error;
  json detail = json::object();
};

// Applies `work` to every manifest entry and writes a report listing each
// sample in manifest order.
int for_each_sample(const Context& ctx, const std::string& report_name,
                    const std::function<json(const ManifestEntry&, const std::string& stem)>& work) {
  const auto entries = require_manifest(ctx);
  std::vector<SampleOutcome> outcomes(entries.size());
  parallel_for(entries.size(), ctx.jobs, [&](std::size_t i) {
    SampleOutcome& o = outcomes[i];
    o.stem = sample_stem(entries[i].sample);
    try {
      o.detail = work(entries[i], o.stem);
    } catch (const std::exception& ex) {
      o.error = ex.what();
    }
  });
  json rows = json::array();
  std::size_t ok = 0;
  for (const auto& o : outcomes) {
    json row = {{"sample", o.stem}, {"status", o.error.empty() ? "ok" : "error"}};
    if (o.error.empty()) {
      ++ok;
      for (const auto& [k, v] : o.detail.items()) row[k] = v;
    } else {
      row["error"] = o.error;
      std::cerr << "viris: " << o.stem << ": " << o.error << "\n";
    }
    rows.push_back(row);
  }
  write_text(ctx.out_dir / report_name,
             to_text({{"processed", outcomes.size()}, {"succeeded", ok}, {"samples", rows}}));
  std::cout << report_name << ": " << ok << "/" << outcomes.size() << " samples succeeded\n";
  return ok == 0 && !outcomes.empty() ? kError : kOk;
}

}  // namespace

int cmd_quality(const Context& ctx, const fs::path& image_path, const std::optional<fs::path>& seg_path) {
  const Raster image = load_png(image_path);
  const Raster gray = to_grayscale(image);
  SegmentationResult seg = seg_path ? segmentation_from_json(json::parse(read_text(*seg_path)), image.width(),
                                                             image.height())
                                    : classical_localize(gray);
  const QualityReport report = assess(gray, seg, ctx.config.quality);
  const std::string text = to_text(quality_json(report, ctx.config.quality));
  write_text(ctx.out_dir / (image_path.stem().string() + "_quality.json"), text);
  std::cout << text;
  return report.overall_pass ? kOk : kPolicyFail;
}

int cmd_gate(const Context& ctx, const fs::path& session_path) {
  const FrameStream stream = load_session(session_path);
  const SessionConfig cfg = ctx.config.session_config(stream.subject, stream.session);
  fs::create_directories(ctx.out_dir);
  const SessionResult result = run_session(
      stream, cfg, [](const std::string& p) { return load_png(p); },
      [&](const Accept& a) { save_png(a.crop, ctx.out_dir / a.saved_path); });
  write_text(ctx.out_dir / "session_result.json", to_text(session_json(result)));
  std::cout << "session " << stream.subject << "-" << eye_letter(stream.eye) << stream.session << ": "
            << result.accepted.size() << "/" << cfg.target_per_eye << " accepted from " << result.frames_processed
            << " frames\n";
  return result.complete ? kOk : kPolicyFail;
}

int cmd_segment(const Context& ctx) {
  return for_each_sample(ctx, "segment_report.json", [&](const ManifestEntry& e, const std::string& stem) {
    const Loaded l = segment_entry(e, ctx.config);
    write_text(ctx.out_dir / (stem + "_seg.json"), to_text(segmentation_json(l.seg)));
    save_mask_png(l.seg.iris_mask, ctx.out_dir / (stem + "_iris.png"));
    save_mask_png(l.seg.pupil_mask, ctx.out_dir / (stem + "_pupil.png"));
    return json{{"source", std::string(source_name(l.seg.source))}, {"degraded", l.seg.degraded}};
  });
}

int cmd_normalize(const Context& ctx) {
  return for_each_sample(ctx, "normalize_report.json", [&](const ManifestEntry& e, const std::string& stem) {
    const Loaded l = segment_entry(e, ctx.config);
    const NormalizedStrip strip = strip_for(l, ctx.config);
    fs::create_directories(ctx.out_dir);
    save_png(strip.texture, ctx.out_dir / (stem + "_norm.png"));
    save_mask_png(strip.validity, ctx.out_dir / (stem + "_mask.png"));
    const double valid = static_cast<double>(strip.validity.count()) / static_cast<double>(strip.validity.size());
    return json{{"valid_fraction", valid}};
  });
}

int cmd_encode(const Context& ctx) {
  const FilterBank bank = build_bank(ctx.config.grid, ctx.config.bank);
  return for_each_sample(ctx, "encode_report.json", [&](const ManifestEntry& e, const std::string& stem) {
    const Loaded l = segment_entry(e, ctx.config);
    TemplateRecord t = encode(strip_for(l, ctx.config), bank, ctx.config.grid);
    t.sample = e.sample;
    fs::create_directories(ctx.out_dir);
    save_template(t, ctx.out_dir / (stem + kTemplateExtension));
    const auto usable = std::count(t.mask_bits.begin(), t.mask_bits.end(), 1);
    return json{{"usable_bits", usable}, {"total_bits", t.bit_count()}};
  });
}

int cmd_match(const Context& ctx, const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == kTemplateExtension) files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.stem().string() < b.stem().string(); });
  if (files.size() < 2) throw ParameterError("matching needs at least two templates");

  std::vector<PackedTemplate> templates(files.size());
  parallel_for(files.size(), ctx.jobs, [&](std::size_t i) { templates[i] = pack(load_template(files[i])); });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < files.size(); ++i)
    for (std::size_t j = i + 1; j < files.size(); ++j) pairs.emplace_back(i, j);
  std::vector<std::string> rows(pairs.size());
  parallel_for(pairs.size(), ctx.jobs, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    std::string row = files[i].stem().string() + "," + files[j].stem().string() + ",";
    try {
      const MatchScore s = match(templates[i], templates[j], ctx.config.match);
      row += fmt(s.hd) + "," + std::to_string(s.best_shift) + "," + std::to_string(s.compared_bits);
    } catch (const MatchError&) {
      row += ",,0";
    }
    rows[k] = row;
  });
  std::string csv = "sample_a,sample_b,hd,shift,bits\n";
  for (const auto& r : rows) csv += r + "\n";
  write_text(ctx.out_dir / "scores.csv", csv);
  std::cout << "scores.csv: " << rows.size() << " pairs from " << files.size() << " templates\n";
  return kOk;
}

int cmd_eval(const Context& ctx, const fs::path& scores_path) {
  std::map<std::string, SampleId> known;
  if (ctx.manifest)
    for (const auto& e : load_manifest(*ctx.manifest)) known.emplace(sample_stem(e.sample), e.sample);
  auto identity = [&](const std::string& stem) {
    if (ctx.manifest) {
      const auto it = known.find(stem);
      if (it == known.end()) throw ParseError("scores", "sample '" + stem + "' is not in the manifest");
      return it->second;
    }
    return parse_stem(stem);
  };

  std::istringstream in(read_text(scores_path));
  std::string line;
  if (!std::getline(in, line) || line != "sample_a,sample_b,hd,shift,bits")
    throw ParseError("scores", "expected header 'sample_a,sample_b,hd,shift,bits'");
  ScoreSet scores;
  std::size_t line_no = 1, skipped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    if (cols.size() == 4 && line.back() == ',') cols.emplace_back();
    if (cols.size() != 5) throw ParseError("scores", "line " + std::to_string(line_no) + ": expected 5 columns");
    if (cols[2].empty()) {
      ++skipped;
      continue;
    }
    const SampleId a = identity(cols[0]), b = identity(cols[1]);
    double hd = 0.0;
    try {
      hd = std::stod(cols[2]);
    } catch (const std::exception&) {
      throw ParseError("scores", "line " + std::to_string(line_no) + ": bad score '" + cols[2] + "'");
    }
    if (a.subject != b.subject)
      scores.impostor.push_back(hd);
    else if (a.eye == b.eye)
      scores.genuine.push_back(hd);
    else if (ctx.config.cross_eye_impostors)
      scores.impostor.push_back(hd);
  }
  const VerificationReport report = verify(scores, ctx.config.far_targets, ctx.config.det_points);
  json j = verification_json(report);
  j["skipped_pairs"] = skipped;
  write_text(ctx.out_dir / "verification.json", to_text(j));
  std::string det = "threshold,fmr,fnmr\n";
  for (const auto& p : report.det_points) det += fmt(p.threshold) + "," + fmt(p.fmr) + "," + fmt(p.fnmr) + "\n";
  write_text(ctx.out_dir / "det.csv", det);
  write_text(ctx.out_dir / "det.svg", det_svg(report));
  std::cout << "EER " << fmt(100.0 * report.eer) << "% at threshold " << fmt(report.eer_threshold) << ", d' "
            << fmt(report.stats.dprime) << ", AUC " << fmt(report.auc) << "\n";
  return report.eer <= ctx.config.max_eer ? kOk : kPolicyFail;
}

int cmd_seg_eval(const Context& ctx, const fs::path& pred_dir, const fs::path& gt_dir) {
  if (!fs::is_directory(gt_dir)) throw IoError("not a directory: " + gt_dir.string());
  if (!fs::is_directory(pred_dir)) throw IoError("not a directory: " + pred_dir.string());
  const std::string suffix = "_iris.png";
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(gt_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix)) stems.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) throw ParameterError("no '*_iris.png' ground-truth masks in " + gt_dir.string());

  SegEvalReport report;
  report.rows.resize(stems.size());
  parallel_for(stems.size(), ctx.jobs, [&](std::size_t i) {
    SegEvalRow& row = report.rows[i];
    row.name = stems[i];
    try {
      const auto load = [&](const fs::path& d, const char* cls) {
        return load_mask_png(d / (stems[i] + "_" + cls + ".png"));
      };
      row.iris = class_scores(load(pred_dir, "iris"), load(gt_dir, "iris"));
      row.pupil = class_scores(load(pred_dir, "pupil"), load(gt_dir, "pupil"));
    } catch (const std::exception& e) {
      row.iris.reset();
      row.pupil.reset();
      row.error = e.what();
    }
  });
  summarize(report);
  write_text(ctx.out_dir / "seg_eval.json", to_text(seg_eval_json(report)));
  std::cout << "seg_eval.json: " << report.evaluated << "/" << report.rows.size() << " pairs, iris IoU "
            << fmt(report.iris.iou) << ", pupil IoU " << fmt(report.pupil.iou) << "\n";
  return kOk;
}

}  // namespace viris::cli
