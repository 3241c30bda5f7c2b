// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <variant>

#include "support/eval_oracle.hpp"
#include "support/synthetic_eye.hpp"
#include "viris/capture_gate.hpp"
#include "viris/dataset.hpp"
#include "viris/evaluation.hpp"
#include "viris/geometry.hpp"
#include "viris/iriscode.hpp"
#include "viris/normalize.hpp"
#include "viris/png_io.hpp"
#include "viris/quality.hpp"
#include "viris/segmenter.hpp"

using namespace viris;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind = Fail;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Fail, std::move(d)}; }

template <typename... Args>
std::string format(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared pipeline: segment, unwrap, enhance colour strips, encode.
TemplateRecord encode_image(const Raster& image, const FilterBank& bank, const CodeGrid& grid) {
  const SegmentationResult seg = classical_localize(image);
  NormalizedStrip strip = rubber_sheet(image, seg, derived_occlusion(seg));
  if (strip.texture.channels() == 3) strip = enhance_strip(strip);
  return encode(strip, bank, grid);
}

VerificationReport verify_templates(const std::vector<SampleId>& ids, const std::vector<PackedTemplate>& t,
                                    std::size_t* skipped) {
  const PairSets pairs = build_pairs(ids);
  ScoreSet scores;
  *skipped = 0;
  auto score = [&](std::size_t i, std::size_t j, std::vector<double>& out) {
    try {
      out.push_back(match(t[i], t[j]).hd);
    } catch (const MatchError&) {
      ++*skipped;
    }
  };
  for (auto [i, j] : pairs.genuine) score(i, j, scores.genuine);
  for (auto [i, j] : pairs.impostor) score(i, j, scores.impostor);
  return verify(scores);
}

// 1 ------------------------------------------------------------------------
Outcome dprime_reproduction() {
  struct Row {
    const char* name;
    double gm, gs, im, is, dprime;
  };
  const Row rows[] = {{"MICHE", 0.7671, 0.0575, 0.6382, 0.0503, 2.386},
                      {"UBIRIS.v1", 0.8772, 0.0628, 0.6692, 0.0673, 3.195},
                      {"UBIRIS.v2", 0.7497, 0.0381, 0.5928, 0.0634, 3.002},
                      {"CUVIRIS", 0.9312, 0.0255, 0.6479, 0.0794, 4.808}};
  std::string detail;
  bool ok = true;
  for (const Row& r : rows) {
    // Two-point lists carry exactly the published mean and population std.
    const ScoreSet s{{r.gm - r.gs, r.gm + r.gs}, {r.im - r.is, r.im + r.is}, Polarity::Similarity};
    const double d = dist_stats(s).dprime;
    ok = ok && std::abs(d - r.dprime) <= 0.02;
    detail += format("%s %.3f/%.3f ", r.name, d, r.dprime);
  }
  return ok ? pass(detail) : fail(detail);
}

// 2 ------------------------------------------------------------------------
Outcome evaluation_oracle() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ScoreSet s = testing::random_score_set(rng);
    const double errs[] = {std::abs(eer(s).fmr - testing::oracle_eer(s).value),
                           std::abs(eer(s).threshold - testing::oracle_eer(s).threshold),
                           std::abs(auc(s) - testing::oracle_auc(s)),
                           std::abs(tar_at_far(s, 0.01).tar - testing::oracle_tar(s, 0.01)),
                           std::abs(tar_at_far(s, 0.0001).tar - testing::oracle_tar(s, 0.0001)),
                           std::abs(zero_fmr(s) - testing::oracle_zero_fmr(s)),
                           std::abs(zero_fnmr(s) - testing::oracle_zero_fnmr(s))};
    for (double e : errs) worst = std::max(worst, e);
  }
  const std::string d = format("100 score sets, max deviation %.2e", worst);
  return worst <= 1e-9 ? pass(d) : fail(d);
}

// 3 ------------------------------------------------------------------------
Outcome shift_recovery() {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution bit(0.5);
  int bad = 0;
  for (int n = 0; n < 1000; ++n) {
    TemplateRecord a;
    a.rows = 8;
    a.cols = 336;
    a.n_filters = 3;
    a.code_bits.resize(a.bit_count());
    for (auto& b : a.code_bits) b = bit(rng);
    a.mask_bits.assign(a.bit_count(), 1);
    const PackedTemplate pa = pack(a);
    for (int k = -14; k <= 14; ++k) {
      const MatchScore m = match(pa, pack(column_shift(a, k)));
      bad += !(m.hd == 0.0 && m.best_shift == k);
    }
  }
  const std::string d = format("1000 templates x 29 shifts, %d mismatches", bad);
  return bad == 0 ? pass(d) : fail(d);
}

// 4 ------------------------------------------------------------------------
double ncc(const Plane<double>& a, const Plane<double>& b) {
  const double ma = a.mean(), mb = b.mean();
  return ((a - ma) * (b - mb)).sum() / std::sqrt((a - ma).square().sum() * (b - mb).square().sum());
}

Outcome rotation_equivariance() {
  double worst = 1.0;
  for (std::uint64_t seed : {7u, 19u, 23u}) {
    testing::EyeSpec spec = testing::compliant_eye();
    spec.texture_seed = seed;
    spec.noise_sigma = 0.0;
    spec.planar_texture_amp = 0.0;
    spec.blur_sigma = 1.0;
    const Plane<double> base = rubber_sheet(testing::render_eye(spec), testing::truth(spec)).texture.channel(0);
    for (int m : {1, 7, 14}) {
      testing::EyeSpec turned = spec;
      turned.rotation = 2 * kPi * m / 512;
      const Plane<double> s = rubber_sheet(testing::render_eye(turned), testing::truth(turned)).texture.channel(0);
      Plane<double> back(s.rows(), s.cols());
      for (int j = 0; j < 512; ++j) back.col(j) = s.col((j + m) % 512);
      worst = std::min(worst, ncc(back, base));
    }
  }
  const std::string d = format("3 eyes x m in {1,7,14}, min NCC %.5f", worst);
  return worst >= 0.99 ? pass(d) : fail(d);
}

// 5 ------------------------------------------------------------------------
Outcome ellipse_recovery() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  double worst_c = 0, worst_r = 0, worst_a = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double rx = 25 + 50 * u(rng);
    const Ellipse<double> e = canonicalize(Ellipse<double>{120 + 20 * (u(rng) - 0.5), 100 + 20 * (u(rng) - 0.5), rx,
                                                           rx * (0.4 + 0.4 * u(rng)), kPi * u(rng)});
    const Ellipse<double> f = canonicalize(fit_ellipse_lsq(mask_edge_points(rasterize_ellipse(e, 240, 200))));
    worst_c = std::max(worst_c, (f.center() - e.center()).norm());
    worst_r = std::max({worst_r, std::abs(f.rx - e.rx) / e.rx, std::abs(f.ry - e.ry) / e.ry});
    double da = std::fmod(std::abs(f.alpha - e.alpha), kPi);
    da = std::min(da, kPi - da);
    worst_a = std::max(worst_a, da * 180 / kPi);
  }
  const std::string d =
      format("200 ellipses, max centre %.3f px, radii %.3f%%, angle %.3f deg", worst_c, 100 * worst_r, worst_a);
  return worst_c <= 0.5 && worst_r <= 0.01 && worst_a <= 1.0 ? pass(d) : fail(d);
}

// 6 ------------------------------------------------------------------------
Outcome sdt_correctness() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> dim(4, 64);
  std::uniform_real_distribution<double> u(0, 1);
  long pixels = 0, sign_errors = 0, boundary_errors = 0, range_errors = 0;
  const double clip = 16.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int w = dim(rng), h = dim(rng);
    // A few random discs and boxes.
    BinaryMask m = BinaryMask::Constant(h, w, false);
    for (int k = 0; k < 4; ++k) {
      const double cx = u(rng) * w, cy = u(rng) * h, r = 2 + u(rng) * std::min(w, h) / 3.0;
      m = m || rasterize_ellipse(make_circle(cx, cy, r), w, h);
    }
    m(0, 0) = true;
    m(h - 1, w - 1) = false;
    const Plane<double> v = signed_distance_transform(m, clip);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        ++pixels;
        sign_errors += m(y, x) ? !(v(y, x) > 0) : !(v(y, x) < 0);
        range_errors += !(v(y, x) >= -1.0 && v(y, x) <= 1.0);
      }
    for (const auto& p : mask_to_boundary_points(m)) {
      const int x = static_cast<int>(p.x()), y = static_cast<int>(p.y());
      // Frame-edge pixels count as boundary only when a background pixel is adjacent in frame.
      bool touches = false;
      const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        touches = touches || (nx >= 0 && ny >= 0 && nx < w && ny < h && !m(ny, nx));
      }
      if (touches) boundary_errors += !(std::abs(v(y, x)) <= 1.0 / clip);
    }
  }
  const std::string d = format("50 masks, %ld pixels, %ld sign / %ld boundary / %ld range errors", pixels, sign_errors,
                               boundary_errors, range_errors);
  return sign_errors == 0 && boundary_errors == 0 && range_errors == 0 ? pass(d) : fail(d);
}

// 7 ------------------------------------------------------------------------
Outcome gate_behaviour() {
  const BBox full{0, 0, 640, 360};
  SessionConfig cfg;
  cfg.subject = "016";
  cfg.session = 1;

  testing::EyeSpec spec = testing::compliant_eye();
  std::vector<double> s;
  bool holds = true;
  for (double sigma : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    spec.blur_sigma = sigma;
    const Raster img = testing::render_eye(spec);
    s.push_back(laplacian_sharpness_8bit(to_grayscale(img)));
    if (s.back() < cfg.sharpness_gate) {
      const GateDecision g = gate_frame(img, full, cfg, Eye::Left, 1);
      const Reject* r = std::get_if<Reject>(&g);
      holds = holds && r && r->feedback == FeedbackCode::HoldSteady;
    }
  }
  bool monotone = true;
  for (std::size_t k = 2; k < s.size(); ++k) monotone = monotone && s[k] < s[k - 1];

  FrameStream stream;
  stream.subject = "016";
  stream.session = 1;
  stream.eye = Eye::Left;
  std::map<std::string, Raster> frames;
  for (int k = 0; k < 11; ++k) {
    testing::EyeSpec f = testing::compliant_eye();
    f.noise_seed = 500 + k;
    if (k == 2 || k == 6) f.blur_sigma = 3.0;
    const std::string name = "frame" + std::to_string(k);
    frames.emplace(name, testing::render_eye(f));
    stream.frames.push_back({name, full, std::nullopt});
  }
  cfg.target_per_eye = 100;
  const SessionResult res = run_session(stream, cfg, [&](const std::string& p) { return frames.at(p); });
  bool consecutive = res.accepted.size() == 9;
  for (std::size_t k = 0; k < res.accepted.size(); ++k)
    consecutive = consecutive && res.accepted[k].sample.trial == static_cast<int>(k) + 1;
  cfg.target_per_eye = 8;
  const SessionResult capped = run_session(stream, cfg, [&](const std::string& p) { return frames.at(p); });
  bool eight = capped.complete && capped.accepted.size() == 8;
  for (std::size_t k = 0; k < capped.accepted.size(); ++k)
    eight = eight && capped.accepted[k].sample.trial == static_cast<int>(k) + 1;

  const std::string d = format("S(0.5..4) = %.1f %.1f %.1f %.1f; %zu/9 uncapped accepts; %zu accepts at target 8",
                               s[1], s[2], s[3], s[4], res.accepted.size(), capped.accepted.size());
  return monotone && holds && consecutive && eight ? pass(d) : fail(d);
}

// 8 ------------------------------------------------------------------------
Outcome end_to_end() {
  const CodeGrid grid;
  const FilterBank bank = build_bank(grid);
  const auto gallery = testing::make_gallery(20, 4, 2025);
  std::vector<SampleId> ids;
  std::vector<PackedTemplate> templates;
  int failures = 0;
  for (const auto& g : gallery) {
    try {
      templates.push_back(pack(encode_image(testing::render_eye(g.spec), bank, grid)));
      ids.push_back(g.id);
    } catch (const std::exception&) {
      ++failures;
    }
  }
  std::size_t skipped = 0;
  const VerificationReport r = verify_templates(ids, templates, &skipped);
  const std::string d = format("%zu samples (%d failed), %zu genuine / %zu impostor, EER %.3f%%, d' %.2f", ids.size(),
                               failures, r.n_genuine, r.n_impostor, 100 * r.eer, r.stats.dprime);
  return failures == 0 && r.eer < 0.05 && r.stats.dprime > 2.5 ? pass(d) : fail(d);
}

// 9 ------------------------------------------------------------------------
Outcome segmentation_metrics() {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> dim(1, 32);
  std::uniform_real_distribution<double> u(0, 1);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = dim(rng), h = dim(rng);
    const double pa = u(rng), pb = u(rng);
    BinaryMask a(h, w), b(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) a(y, x) = u(rng) < pa, b(y, x) = u(rng) < pb;
    long inter = 0, uni = 0, na = 0, nb = 0, diff = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        inter += a(y, x) && b(y, x);
        uni += a(y, x) || b(y, x);
        na += a(y, x);
        nb += b(y, x);
        diff += a(y, x) != b(y, x);
      }
    const double iou = uni ? static_cast<double>(inter) / uni : 1.0;
    const double dice = na + nb ? 2.0 * inter / (na + nb) : 1.0;
    const double e = static_cast<double>(diff) / (w * h);
    const ClassScores c = class_scores(a, b);
    mismatches += !(c.iou == iou && c.dice == dice && c.e1 == e && c.dice >= c.iou);
  }
  const std::string d = format("100 mask pairs, %d mismatches", mismatches);
  return mismatches == 0 ? pass(d) : fail(d);
}

// 10 -----------------------------------------------------------------------
Outcome format_round_trips() {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> pos(1, 999), len(1, 8), rows(1, 16), cols(1, 600), filt(1, 8);
  const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  int bad_names = 0, bad_templates = 0;
  for (int n = 0; n < 1000; ++n) {
    SampleId id;
    for (int k = len(rng); k > 0; --k) id.subject += alphabet[rng() % alphabet.size()];
    id.eye = rng() % 2 ? Eye::Left : Eye::Right;
    id.session = pos(rng);
    id.trial = pos(rng);
    try {
      const SampleId back = parse_filename(format_filename(id));
      bad_names += !(back.subject == id.subject && back.eye == id.eye && back.session == id.session &&
                     back.trial == id.trial);
    } catch (const std::exception&) {
      ++bad_names;
    }

    TemplateRecord t;
    t.rows = rows(rng);
    t.cols = cols(rng);
    t.n_filters = filt(rng);
    for (std::size_t k = 0; k < t.bit_count(); ++k) {
      t.code_bits.push_back(rng() & 1);
      t.mask_bits.push_back(rng() & 1);
    }
    try {
      const TemplateRecord back = deserialize_template(serialize_template(t));
      bad_templates += !(back.rows == t.rows && back.cols == t.cols && back.n_filters == t.n_filters &&
                         back.code_bits == t.code_bits && back.mask_bits == t.mask_bits);
    } catch (const std::exception&) {
      ++bad_templates;
    }
  }
  const std::string d = format("1000 filenames (%d bad), 1000 templates (%d bad)", bad_names, bad_templates);
  return bad_names == 0 && bad_templates == 0 ? pass(d) : fail(d);
}

// 11 -----------------------------------------------------------------------
Outcome public_subset() {
  const char* dir = std::getenv("VIRIS_CUVIRIS_DIR");
  if (!dir || !*dir || !fs::is_directory(dir)) return {Outcome::Skip, "VIRIS_CUVIRIS_DIR not set or not a directory"};
  const CodeGrid grid;
  const FilterBank bank = build_bank(grid);
  std::vector<SampleId> ids;
  std::vector<PackedTemplate> templates;
  std::size_t images = 0, failed = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    SampleId id;
    try {
      id = parse_filename(e.path().filename().string());
    } catch (const ParseError&) {
      continue;
    }
    ++images;
    try {
      templates.push_back(pack(encode_image(load_png(e.path()), bank, grid)));
      ids.push_back(id);
    } catch (const std::exception&) {
      ++failed;
    }
  }
  if (ids.size() < 2) return fail(format("%zu usable images found", ids.size()));
  std::size_t skipped = 0;
  const VerificationReport r = verify_templates(ids, templates, &skipped);
  const std::string d = format("%zu images (%zu failed), %zu genuine / %zu impostor, EER %.3f%%", images, failed,
                               r.n_genuine, r.n_impostor, 100 * r.eer);
  return std::isfinite(r.eer) ? pass(d) : fail(d);
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"d' from published distribution statistics", 1, dprime_reproduction},
      {"evaluation statistics match a brute-force sweep", 10, evaluation_oracle},
      {"exact shift recovery within +/-14 columns", 30, shift_recovery},
      {"rubber-sheet rotation equivariance", 30, rotation_equivariance},
      {"ellipse fit recovery", 10, ellipse_recovery},
      {"signed distance transform", 10, sdt_correctness},
      {"capture gate behaviour", 30, gate_behaviour},
      {"end-to-end synthetic gallery", 300, end_to_end},
      {"segmentation metric oracle", 5, segmentation_metrics},
      {"filename and template round trips", 5, format_round_trips},
      {"public subset smoke test", 600, public_subset},
  };
  int failures = 0, n = 0;
  for (const auto& c : criteria) {
    ++n;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.kind == Outcome::Pass && secs > c.budget_s) {
      o.kind = Outcome::Fail;
      o.detail += format("; over the %.0f s budget", c.budget_s);
    }
    const char* tag = o.kind == Outcome::Pass ? "PASS" : o.kind == Outcome::Skip ? "SKIP" : "FAIL";
    failures += o.kind == Outcome::Fail;
    std::printf("%s [%2d] %s: %s (%.2f s)\n", tag, n, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria failed\n", failures, n);
  return failures == 0 ? 0 : 1;
}
