#include "viris/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace viris {

PairSets build_pairs(const std::vector<SampleId>& samples, bool cross_eye_impostors) {
  PairSets out;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const SampleId &a = samples[i], &b = samples[j];
      if (a.subject != b.subject)
        out.impostor.emplace_back(i, j);
      else if (a.eye == b.eye)
        out.genuine.emplace_back(i, j);
      else if (cross_eye_impostors)
        out.impostor.emplace_back(i, j);
    }
  return out;
}

namespace {

void require_scores(const ScoreSet& s) {
  if (s.genuine.empty() || s.impostor.empty()) throw ParameterError("score set needs genuine and impostor scores");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(s.genuine.begin(), s.genuine.end(), finite) ||
      !std::all_of(s.impostor.begin(), s.impostor.end(), finite))
    throw ParameterError("scores must be finite");
}

// Distances: lower is a better match. Similarities are negated so that one
// code path handles both.
std::vector<double> as_distance(const std::vector<double>& v, Polarity p) {
  std::vector<double> out(v);
  if (p == Polarity::Similarity)
    for (double& x : out) x = -x;
  std::sort(out.begin(), out.end());
  return out;
}

double external(double t, Polarity p) { return p == Polarity::Similarity ? -t : t; }

}  // namespace

Rates error_rates(const ScoreSet& s, double threshold) {
  require_scores(s);
  auto accepted = [&](double v) { return s.polarity == Polarity::Distance ? v <= threshold : v >= threshold; };
  const auto g = std::count_if(s.genuine.begin(), s.genuine.end(), accepted);
  const auto i = std::count_if(s.impostor.begin(), s.impostor.end(), accepted);
  return {static_cast<double>(i) / s.impostor.size(), 1.0 - static_cast<double>(g) / s.genuine.size()};
}

std::vector<OperatingPoint> sweep(const ScoreSet& s) {
  require_scores(s);
  const std::vector<double> g = as_distance(s.genuine, s.polarity);
  const std::vector<double> im = as_distance(s.impostor, s.polarity);
  std::vector<double> all(g);
  all.insert(all.end(), im.begin(), im.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  const double ng = static_cast<double>(g.size()), ni = static_cast<double>(im.size());
  std::vector<OperatingPoint> pts;
  pts.reserve(all.size() + 1);
  const double below = std::nextafter(all.front(), -std::numeric_limits<double>::infinity());
  pts.push_back({external(below, s.polarity), 0.0, 1.0});
  std::size_t gi = 0, ii = 0;
  for (double t : all) {
    while (gi < g.size() && g[gi] <= t) ++gi;
    while (ii < im.size() && im[ii] <= t) ++ii;
    pts.push_back({external(t, s.polarity), ii / ni, 1.0 - gi / ng});
  }
  return pts;
}

namespace {

OperatingPoint eer_from(const std::vector<OperatingPoint>& pts, std::size_t* index = nullptr) {
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double d1 = pts[k].fmr - pts[k].fnmr;
    if (d1 < 0.0) continue;
    const double d0 = pts[k - 1].fmr - pts[k - 1].fnmr;
    const double t = d0 / (d0 - d1);
    OperatingPoint p;
    p.fmr = pts[k - 1].fmr + t * (pts[k].fmr - pts[k - 1].fmr);
    p.fnmr = pts[k - 1].fnmr + t * (pts[k].fnmr - pts[k - 1].fnmr);
    p.threshold = pts[k - 1].threshold + t * (pts[k].threshold - pts[k - 1].threshold);
    if (index) *index = k;
    return p;
  }
  // The loosest point always has fnmr = 0, so the loop returns.
  return pts.back();
}

}  // namespace

OperatingPoint eer(const ScoreSet& s) {
  OperatingPoint p = eer_from(sweep(s));
  const double v = 0.5 * (p.fmr + p.fnmr);
  p.fmr = p.fnmr = v;
  return p;
}

TarAtFar tar_at_far(const ScoreSet& s, double far_target) {
  if (!(far_target > 0.0 && far_target <= 1.0)) throw ParameterError("far target must lie in (0, 1]");
  const auto pts = sweep(s);
  std::size_t best = 0;
  for (std::size_t k = 0; k < pts.size(); ++k)
    if (pts[k].fmr <= far_target) best = k;
  TarAtFar r;
  r.far_target = far_target;
  r.tar = 1.0 - pts[best].fnmr;
  r.threshold = pts[best].threshold;
  r.achieved_fmr = pts[best].fmr;
  r.flagged = best == 0 || far_target < 1.0 / static_cast<double>(s.impostor.size());
  return r;
}

double auc(const ScoreSet& s) {
  require_scores(s);
  const std::vector<double> g = as_distance(s.genuine, s.polarity);
  const std::vector<double> im = as_distance(s.impostor, s.polarity);
  // For each genuine score: impostors strictly worse (larger) count 1, ties 1/2.
  double wins = 0.0;
  for (double v : g) {
    const auto lo = std::lower_bound(im.begin(), im.end(), v);
    const auto hi = std::upper_bound(lo, im.end(), v);
    wins += static_cast<double>(im.end() - hi) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(g.size()) * static_cast<double>(im.size()));
}

double decidability(double gmean, double gstd, double imean, double istd) {
  const double pooled = std::sqrt(0.5 * (gstd * gstd + istd * istd));
  const double gap = std::abs(gmean - imean);
  if (pooled == 0.0) return gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return gap / pooled;
}

DistStats dist_stats(const ScoreSet& s) {
  if (s.genuine.size() < 2 || s.impostor.size() < 2)
    throw ParameterError("distribution statistics need at least two scores per class");
  auto moments = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / v.size())};
  };
  const auto [gm, gs] = moments(s.genuine);
  const auto [im, is] = moments(s.impostor);
  return {gm, gs, im, is, decidability(gm, gs, im, is)};
}

double zero_fmr(const ScoreSet& s) {
  const auto pts = sweep(s);
  double out = 1.0;
  for (const auto& p : pts)
    if (p.fmr == 0.0) out = p.fnmr;
  return out;
}

double zero_fnmr(const ScoreSet& s) {
  for (const auto& p : sweep(s))
    if (p.fnmr == 0.0) return p.fmr;
  return 1.0;
}

std::vector<OperatingPoint> det_curve(const ScoreSet& s, std::size_t n_points) {
  if (n_points < 3) throw ParameterError("DET curve needs at least three points");
  std::vector<OperatingPoint> pts = sweep(s);
  std::size_t at = 0;
  const OperatingPoint e = eer_from(pts, &at);
  pts.insert(pts.begin() + static_cast<std::ptrdiff_t>(at), e);

  // Loose threshold first: (fmr 1, fnmr 0) ... (0, 1).
  std::reverse(pts.begin(), pts.end());
  const std::size_t eer_index = pts.size() - 1 - at;
  if (pts.size() <= n_points) return pts;

  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < n_points - 1; ++k)
    keep.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(k) * (pts.size() - 1) / (n_points - 2))));
  keep.resize(n_points - 1);
  keep.back() = pts.size() - 1;
  keep.push_back(eer_index);
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  std::vector<OperatingPoint> out;
  for (std::size_t k : keep) out.push_back(pts[k]);
  return out;
}

double probit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("probit argument must lie in (0, 1)");
  // Acklam's rational approximation, refined by one Halley step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double lo = 0.02425, hi = 1.0 - lo;
  double x;
  if (p < lo) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= hi) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

VerificationReport verify(const ScoreSet& s, const std::vector<double>& far_targets, std::size_t n_det_points) {
  require_scores(s);
  VerificationReport r;
  r.n_genuine = s.genuine.size();
  r.n_impostor = s.impostor.size();
  const OperatingPoint e = eer(s);
  r.eer = e.fmr;
  r.eer_threshold = e.threshold;
  for (double f : far_targets) r.tar_at_far.push_back(tar_at_far(s, f));
  r.auc = auc(s);
  if (s.genuine.size() >= 2 && s.impostor.size() >= 2) r.stats = dist_stats(s);
  r.zero_fmr = zero_fmr(s);
  r.zero_fnmr = zero_fnmr(s);
  r.fmr_resolution = 1.0 / static_cast<double>(r.n_impostor);
  r.fnmr_resolution = 1.0 / static_cast<double>(r.n_genuine);
  r.det_points = det_curve(s, n_det_points);
  return r;
}

OverlapScores iou_dice(const BinaryMask& a, const BinaryMask& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ParameterError("mask dimensions differ");
  const double inter = static_cast<double>((a && b).count());
  const double uni = static_cast<double>((a || b).count());
  const double total = static_cast<double>(a.count() + b.count());
  if (total == 0.0) return {1.0, 1.0};
  return {inter / uni, 2.0 * inter / total};
}

double e1(const Plane<double>& prob, const BinaryMask& gt) {
  if (prob.rows() != gt.rows() || prob.cols() != gt.cols()) throw ParameterError("map dimensions differ");
  return (prob - gt.cast<double>()).abs().mean();
}

ClassScores class_scores(const BinaryMask& pred, const BinaryMask& gt) {
  const OverlapScores o = iou_dice(pred, gt);
  return {o.iou, o.dice, e1(pred.cast<double>(), gt)};
}

void summarize(SegEvalReport& report) {
  report.iris = report.pupil = {};
  report.evaluated = 0;
  for (const auto& row : report.rows) {
    if (!row.error.empty() || !row.iris || !row.pupil) continue;
    ++report.evaluated;
    for (auto [dst, src] : {std::pair{&report.iris, &*row.iris}, std::pair{&report.pupil, &*row.pupil}}) {
      dst->iou += src->iou;
      dst->dice += src->dice;
      dst->e1 += src->e1;
    }
  }
  if (report.evaluated == 0) return;
  const double n = static_cast<double>(report.evaluated);
  for (ClassScores* c : {&report.iris, &report.pupil}) {
    c->iou /= n;
    c->dice /= n;
    c->e1 /= n;
  }
}

}  // namespace viris
