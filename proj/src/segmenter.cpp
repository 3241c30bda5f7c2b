#include "viris/segmenter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

namespace viris {

std::string_view source_name(SegmentationSource s) {
  switch (s) {
    case SegmentationSource::ExternalMask: return "EXTERNAL_MASK";
    case SegmentationSource::Refit: return "REFIT";
    case SegmentationSource::RegressedFallback: return "REGRESSED_FALLBACK";
    case SegmentationSource::Classical: return "CLASSICAL";
  }
  return "REFIT";
}

SegmentationSource source_from_name(std::string_view name) {
  for (auto s : {SegmentationSource::ExternalMask, SegmentationSource::Refit, SegmentationSource::RegressedFallback,
                 SegmentationSource::Classical})
    if (source_name(s) == name) return s;
  throw ParameterError("unknown segmentation source '" + std::string(name) + "'");
}

BinaryMask threshold_map(const Raster& prob, double t) {
  if (!(t > 0.0 && t < 1.0)) throw ParameterError("threshold must lie in (0, 1)");
  return to_grayscale(prob).channel(0) >= t;
}

std::pair<BinaryMask, BinaryMask> threshold_maps(const Raster& iris_prob, const Raster& pupil_prob, double t) {
  return {threshold_map(iris_prob, t), threshold_map(pupil_prob, t)};
}

BinaryMask largest_component(const BinaryMask& mask) {
  if (!mask.any()) throw ParameterError("mask is empty");
  const Eigen::Index h = mask.rows(), w = mask.cols();
  Plane<int> label = Plane<int>::Zero(h, w);
  int next = 0, best = 0;
  long best_size = 0;
  std::deque<std::pair<Eigen::Index, Eigen::Index>> queue;
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      if (!mask(y, x) || label(y, x) != 0) continue;
      const int id = ++next;
      long size = 0;
      label(y, x) = id;
      queue.emplace_back(y, x);
      while (!queue.empty()) {
        const auto [cy, cx] = queue.front();
        queue.pop_front();
        ++size;
        for (Eigen::Index dy = -1; dy <= 1; ++dy)
          for (Eigen::Index dx = -1; dx <= 1; ++dx) {
            const Eigen::Index ny = cy + dy, nx = cx + dx;
            if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
            if (mask(ny, nx) && label(ny, nx) == 0) {
              label(ny, nx) = id;
              queue.emplace_back(ny, nx);
            }
          }
      }
      if (size > best_size) {
        best_size = size;
        best = id;
      }
    }
  return label == best;
}

namespace {

// 4-connected flood fill of background from (y, x); returns false if the
// region reaches the frame border.
bool enclosed_region(const BinaryMask& mask, Eigen::Index y0, Eigen::Index x0, BinaryMask& region) {
  const Eigen::Index h = mask.rows(), w = mask.cols();
  region = BinaryMask::Constant(h, w, false);
  std::deque<std::pair<Eigen::Index, Eigen::Index>> queue{{y0, x0}};
  region(y0, x0) = true;
  bool enclosed = true;
  constexpr std::array<std::array<int, 2>, 4> steps{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  while (!queue.empty()) {
    const auto [y, x] = queue.front();
    queue.pop_front();
    if (y == 0 || x == 0 || y == h - 1 || x == w - 1) enclosed = false;
    for (const auto& s : steps) {
      const Eigen::Index ny = y + s[0], nx = x + s[1];
      if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
      if (!mask(ny, nx) && !region(ny, nx)) {
        region(ny, nx) = true;
        queue.emplace_back(ny, nx);
      }
    }
  }
  return enclosed;
}

}  // namespace

BinaryMask fill_holes(const BinaryMask& mask) {
  const Eigen::Index h = mask.rows(), w = mask.cols();
  BinaryMask outside = BinaryMask::Constant(h, w, false);
  std::deque<std::pair<Eigen::Index, Eigen::Index>> queue;
  auto seed = [&](Eigen::Index y, Eigen::Index x) {
    if (!mask(y, x) && !outside(y, x)) {
      outside(y, x) = true;
      queue.emplace_back(y, x);
    }
  };
  for (Eigen::Index x = 0; x < w; ++x) {
    seed(0, x);
    seed(h - 1, x);
  }
  for (Eigen::Index y = 0; y < h; ++y) {
    seed(y, 0);
    seed(y, w - 1);
  }
  constexpr std::array<std::array<int, 2>, 4> steps{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  while (!queue.empty()) {
    const auto [y, x] = queue.front();
    queue.pop_front();
    for (const auto& s : steps) {
      const Eigen::Index ny = y + s[0], nx = x + s[1];
      if (ny >= 0 && nx >= 0 && ny < h && nx < w) seed(ny, nx);
    }
  }
  return !outside;
}

namespace {

struct ClassFit {
  BinaryMask mask;
  Ellipse<double> ellipse;
  bool refit = false;
};

ClassFit fit_class(const BinaryMask& mask, const std::optional<EllipseEncoding<double>>& regressed,
                   const FitReliability& rel, const char* name) {
  const int w = static_cast<int>(mask.cols()), h = static_cast<int>(mask.rows());
  if (mask.any()) {
    BinaryMask comp = largest_component(mask);
    const std::vector<PointPx> pts = mask_edge_points(fill_holes(comp));
    try {
      const Ellipse<double> e = fit_ellipse_lsq(pts);
      const bool reliable = ellipse_rms_residual(e, pts) < rel.max_rms_residual && e.ry / e.rx > rel.min_axis_ratio &&
                            e.rx < 2.0 * std::max(w, h);
      if (reliable) return {std::move(comp), e, true};
    } catch (const FitError&) {
    }
  }
  if (!regressed)
    throw SegmentationError(std::string(name) + " refit is unreliable and no regressed ellipse is available");
  const Ellipse<double> e = decode_ellipse<double>(*regressed, w, h);
  return {rasterize_ellipse(e, w, h), e, false};
}

}  // namespace

SegmentationResult refit_or_fallback(const BinaryMask& iris_mask, const BinaryMask& pupil_mask,
                                     const std::optional<RegressedEllipses>& regressed,
                                     const FitReliability& reliability) {
  if (iris_mask.rows() != pupil_mask.rows() || iris_mask.cols() != pupil_mask.cols())
    throw ParameterError("iris and pupil masks must share dimensions");
  std::optional<EllipseEncoding<double>> reg_iris, reg_pupil;
  if (regressed) {
    reg_iris = regressed->iris;
    reg_pupil = regressed->pupil;
  }
  ClassFit iris = fit_class(iris_mask, reg_iris, reliability, "iris");
  ClassFit pupil = fit_class(pupil_mask, reg_pupil, reliability, "pupil");

  // An annular iris mask leaves the pupil as a hole; close that hole so the
  // iris region covers the pupil.
  const auto px = static_cast<Eigen::Index>(std::lround(pupil.ellipse.cx));
  const auto py = static_cast<Eigen::Index>(std::lround(pupil.ellipse.cy));
  if (px >= 0 && py >= 0 && px < iris.mask.cols() && py < iris.mask.rows() && !iris.mask(py, px)) {
    BinaryMask hole;
    if (enclosed_region(iris.mask, py, px, hole)) iris.mask = iris.mask || hole;
  }

  SegmentationResult res;
  res.iris_mask = std::move(iris.mask);
  res.pupil_mask = std::move(pupil.mask);
  res.iris = iris.ellipse;
  res.pupil = pupil.ellipse;
  res.source = iris.refit && pupil.refit ? SegmentationSource::Refit : SegmentationSource::RegressedFallback;
  return res;
}

SegmentationResult enforce_containment(SegmentationResult result) {
  const long before = result.pupil_mask.count();
  result.pupil_mask = result.pupil_mask && result.iris_mask;
  const long after = result.pupil_mask.count();
  if (2 * (before - after) > before) result.degraded = true;
  return result;
}

BinaryMask derived_occlusion(const SegmentationResult& seg) {
  const int w = seg.width(), h = seg.height();
  const BinaryMask annulus = rasterize_ellipse(seg.iris, w, h) && !rasterize_ellipse(seg.pupil, w, h);
  return annulus && !seg.iris_mask;
}

// ---------------------------------------------------------------------------
// Classical localization

namespace {

struct Edge {
  double x, y;
  double ux, uy;  // unit gradient, pointing towards brighter intensity
};

struct Circle {
  double cx, cy, r;
};

std::vector<Edge> detect_edges(const Plane<double>& g, const LocalizerParams& p) {
  const Eigen::Index h = g.rows(), w = g.cols();
  Plane<double> gx = Plane<double>::Zero(h, w), gy = Plane<double>::Zero(h, w);
  for (Eigen::Index y = 1; y + 1 < h; ++y)
    for (Eigen::Index x = 1; x + 1 < w; ++x) {
      gx(y, x) = 0.5 * (g(y, x + 1) - g(y, x - 1));
      gy(y, x) = 0.5 * (g(y + 1, x) - g(y - 1, x));
    }
  const Plane<double> mag = (gx.square() + gy.square()).sqrt();
  std::vector<Edge> edges;
  for (Eigen::Index y = 1; y + 1 < h; ++y)
    for (Eigen::Index x = 1; x + 1 < w; ++x) {
      const double m = mag(y, x);
      if (m < p.edge_floor) continue;
      // Non-maximum suppression along the quantised gradient direction.
      const double ang = std::atan2(gy(y, x), gx(y, x));
      const int sector = static_cast<int>(std::lround(ang / (std::numbers::pi / 4))) & 3;
      constexpr std::array<std::array<int, 2>, 4> dir{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}}};
      const int dx = dir[sector][0], dy = dir[sector][1];
      if (m < mag(y + dy, x + dx) || m < mag(y - dy, x - dx)) continue;
      edges.push_back({double(x), double(y), gx(y, x) / m, gy(y, x) / m});
    }
  return edges;
}

std::optional<Circle> kasa_fit(const std::vector<Eigen::Vector2d>& pts) {
  if (pts.size() < 3) return std::nullopt;
  Eigen::MatrixXd a(pts.size(), 3);
  Eigen::VectorXd b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    a.row(i) << pts[i].x(), pts[i].y(), 1.0;
    b(i) = -(pts[i].squaredNorm());
  }
  const Eigen::Vector3d s = a.colPivHouseholderQr().solve(b);
  const double cx = -s(0) / 2, cy = -s(1) / 2;
  const double r2 = cx * cx + cy * cy - s(2);
  if (!(r2 > 0.0) || !std::isfinite(r2)) return std::nullopt;
  return Circle{cx, cy, std::sqrt(r2)};
}

// Edges consistent with a dark-inside circle: near the rim and with the
// gradient pointing radially outwards.
std::vector<Eigen::Vector2d> supporting_points(const std::vector<Edge>& edges, const Circle& c, double tol,
                                               double min_cos) {
  std::vector<Eigen::Vector2d> pts;
  for (const auto& e : edges) {
    const double dx = e.x - c.cx, dy = e.y - c.cy;
    const double r = std::sqrt(dx * dx + dy * dy);
    if (r <= 0.0 || std::abs(r - c.r) > tol) continue;
    if ((e.ux * dx + e.uy * dy) / r < min_cos) continue;
    pts.emplace_back(e.x, e.y);
  }
  return pts;
}

// Per-sector intensity step across the rim: mean of [r+1, r+4] minus mean
// of [r-4, r-1]. Sectors without samples on both sides are NaN.
std::vector<double> sector_steps(const Plane<double>& g, const Circle& c) {
  constexpr int kSectors = 36;
  std::array<double, kSectors> in_sum{}, out_sum{};
  std::array<int, kSectors> in_n{}, out_n{};
  const double r1 = c.r + 4.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(c.cx - r1)));
  const int x1 = std::min(static_cast<int>(g.cols()) - 1, static_cast<int>(std::ceil(c.cx + r1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(c.cy - r1)));
  const int y1 = std::min(static_cast<int>(g.rows()) - 1, static_cast<int>(std::ceil(c.cy + r1)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double ex = x - c.cx, ey = y - c.cy;
      const double d = std::sqrt(ex * ex + ey * ey) - c.r;
      if (std::abs(d) > 4.0 || std::abs(d) < 1.0) continue;
      const double a = std::atan2(y - c.cy, x - c.cx) + std::numbers::pi;
      const int k = std::min(kSectors - 1, static_cast<int>(a / (2 * std::numbers::pi) * kSectors));
      if (d > 0) {
        out_sum[k] += g(y, x);
        ++out_n[k];
      } else {
        in_sum[k] += g(y, x);
        ++in_n[k];
      }
    }
  std::vector<double> steps;
  for (int k = 0; k < kSectors; ++k)
    steps.push_back(in_n[k] && out_n[k] ? out_sum[k] / out_n[k] - in_sum[k] / in_n[k]
                                        : std::numeric_limits<double>::quiet_NaN());
  return steps;
}

// Weber contrast between the ring just outside the circle and the disk
// inside 0.8 r; large only for a dark region bounded by brighter tissue.
double dark_disk_contrast(const Plane<double>& g, const Circle& c) {
  std::vector<double> inside, ring;
  const double reach = c.r + 6.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(c.cx - reach)));
  const int x1 = std::min(static_cast<int>(g.cols()) - 1, static_cast<int>(std::ceil(c.cx + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(c.cy - reach)));
  const int y1 = std::min(static_cast<int>(g.rows()) - 1, static_cast<int>(std::ceil(c.cy + reach)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double ex = x - c.cx, ey = y - c.cy;
      const double d = std::sqrt(ex * ex + ey * ey);
      if (d <= 0.8 * c.r) inside.push_back(g(y, x));
      else if (d >= c.r + 2.0 && d <= c.r + 6.0) ring.push_back(g(y, x));
    }
  if (inside.empty() || ring.empty()) return 0.0;
  auto median = [](std::vector<double>& v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  const double in = median(inside), out = median(ring);
  return std::max(0.0, (out - in) / (out + in + 1.0 / 255.0));
}

using UnitCircle = std::vector<Eigen::Vector2d>;

UnitCircle unit_circle(double r) {
  const int n = std::clamp(static_cast<int>(std::lround(0.5 * std::numbers::pi * r)), 32, 256);
  UnitCircle u(n);
  for (int k = 0; k < n; ++k) u[k] = {std::cos(2.0 * std::numbers::pi * k / n), std::sin(2.0 * std::numbers::pi * k / n)};
  return u;
}

// Mean of the image along a circle; NaN when fewer than half the samples
// fall inside the frame.
double circle_mean(const Plane<double>& g, const UnitCircle& u, double cx, double cy, double r) {
  double acc = 0.0;
  std::size_t used = 0;
  const double xmax = g.cols() - 1, ymax = g.rows() - 1;
  for (const auto& d : u) {
    const double x = cx + r * d.x(), y = cy + r * d.y();
    if (x < 0 || y < 0 || x > xmax || y > ymax) continue;
    acc += sample_bilinear(g, x, y);
    ++used;
  }
  return 2 * used >= u.size() ? acc / used : std::numeric_limits<double>::quiet_NaN();
}

// Circular integro-differential search: maximises the step in contour mean
// across the rim over a local grid of centres and radii.
Circle refine_dark_circle(const Plane<double>& smooth, Circle c, int rmin, int rmax) {
  const UnitCircle u = unit_circle(c.r);
  auto step = [&](double cx, double cy, double r) {
    const double v = circle_mean(smooth, u, cx, cy, r + 1.5) - circle_mean(smooth, u, cx, cy, r - 1.5);
    return std::isfinite(v) ? v : -1.0;
  };
  for (auto [reach, inc] : {std::pair{8.0, 2.0}, std::pair{2.0, 0.5}, std::pair{0.5, 0.125}}) {
    Circle best = c;
    double best_v = step(c.cx, c.cy, c.r);
    const int n = static_cast<int>(std::lround(reach / inc));
    for (int i = -n; i <= n; ++i)
      for (int j = -n; j <= n; ++j)
        for (int k = -n; k <= n; ++k) {
          const double r = c.r + k * inc;
          if (r < rmin || r > rmax) continue;
          const double v = step(c.cx + i * inc, c.cy + j * inc, r);
          if (v > best_v) {
            best_v = v;
            best = {c.cx + i * inc, c.cy + j * inc, r};
          }
        }
    c = best;
  }
  return c;
}

struct SearchWindow {
  double cx, cy, radius;  // radius < 0: whole frame
};

struct Candidate {
  Circle circle;
  double coverage = 0.0;
  double score = 0.0;
};

// Best radius for a fixed centre, then iterative least-squares refinement.
std::optional<Circle> fit_at_centre(const std::vector<Edge>& edges, double cx, double cy, int rmin, int rmax) {
  std::vector<double> hist(rmax + 2, 0.0);
  for (const auto& e : edges) {
    const double dx = e.x - cx, dy = e.y - cy;
    const double r = std::sqrt(dx * dx + dy * dy);
    if (r < rmin - 0.5 || r > rmax + 0.5) continue;
    if ((e.ux * dx + e.uy * dy) / r < 0.9) continue;
    hist[static_cast<std::size_t>(std::lround(r))] += 1.0;
  }
  int best_r = -1;
  double best_ratio = 0.0;
  for (int r = rmin; r <= rmax; ++r) {
    const double v = hist[r - 1 >= 0 ? r - 1 : 0] + hist[r] + hist[r + 1];
    const double ratio = v / (2 * std::numbers::pi * r);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_r = r;
    }
  }
  if (best_r < 0) return std::nullopt;

  Circle c{cx, cy, double(best_r)};
  for (double tol : {2.5, 1.5, 1.0}) {
    const auto refined = kasa_fit(supporting_points(edges, c, tol, 0.8));
    if (!refined) return std::nullopt;
    c = *refined;
  }
  return c;
}

Candidate score_circle(const Plane<double>& gray, const Plane<double>& smooth, Circle c, int rmin, int rmax,
                       bool dark_prior) {
  if (dark_prior) c = refine_dark_circle(smooth, c, rmin, rmax);
  Candidate cand;
  cand.circle = c;
  // Median step over all sectors (missing sectors count as zero) rejects
  // partial arcs; coverage is the share of sectors showing a clear step.
  std::vector<double> steps = sector_steps(gray, c);
  for (double& v : steps)
    if (!std::isfinite(v)) v = 0.0;
  std::vector<double> sorted = steps;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  if (median <= 0.0) return cand;
  cand.coverage = static_cast<double>(std::count_if(steps.begin(), steps.end(),
                                                    [median](double v) { return v > 0.5 * median; })) /
                  static_cast<double>(steps.size());
  cand.score = dark_prior ? dark_disk_contrast(gray, c) : median;
  return cand;
}

// Pupil seeds from dark blobs: connected regions below a few levels between
// the darkest smoothed value and the median, as equal-area circles.
std::vector<Circle> dark_blob_seeds(const Plane<double>& smooth, int rmin, int rmax) {
  const Eigen::Index h = smooth.rows(), w = smooth.cols();
  std::vector<double> values(smooth.data(), smooth.data() + smooth.size());
  std::nth_element(values.begin(), values.begin() + values.size() / 2, values.end());
  const double mid = values[values.size() / 2];
  const double lo = smooth.minCoeff();
  const double min_area = 0.25 * std::numbers::pi * rmin * rmin;
  const double max_area = 1.5 * std::numbers::pi * rmax * rmax;

  std::vector<Circle> seeds;
  Plane<int> label(h, w);
  for (double f : {0.02, 0.04, 0.07, 0.12, 0.2, 0.35}) {
    const double t = lo + f * (mid - lo);
    label.setConstant(-1);
    int next = 0;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) {
        if (smooth(y, x) > t || label(y, x) >= 0) continue;
        double sx = 0, sy = 0, n = 0;
        label(y, x) = next;
        stack.assign(1, {y, x});
        while (!stack.empty()) {
          const auto [cy, cx] = stack.back();
          stack.pop_back();
          sx += cx;
          sy += cy;
          n += 1;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const Eigen::Index ny = cy + dy, nx = cx + dx;
              if (ny < 0 || nx < 0 || ny >= h || nx >= w || label(ny, nx) >= 0 || smooth(ny, nx) > t) continue;
              label(ny, nx) = next;
              stack.emplace_back(ny, nx);
            }
        }
        ++next;
        if (n < min_area || n > max_area) continue;
        const double r = std::clamp(std::sqrt(n / std::numbers::pi), double(rmin), double(rmax));
        seeds.push_back({sx / n, sy / n, r});
      }
  }
  return seeds;
}

std::optional<Candidate> hough_search(const std::vector<Edge>& edges, const Plane<double>& gray,
                                      const Plane<double>& smooth, int rmin, int rmax,
                                      const SearchWindow& window, int n_peaks, bool dark_prior,
                                      const std::vector<Circle>& seeds = {}) {
  // Votes go into (radius bin, 2x2 pixel cell); a cell's strength is its
  // vote count per unit circumference, so partial arcs seen from an offset
  // centre rank below full circles.
  constexpr int kCell = 2, kBin = 2;
  const Eigen::Index h = gray.rows(), w = gray.cols();
  const Eigen::Index cw = (w + kCell - 1) / kCell, ch = (h + kCell - 1) / kCell;
  const int n_bins = (rmax - rmin) / kBin + 1;
  std::vector<float> acc(static_cast<std::size_t>(n_bins) * cw * ch, 0.0f);
  for (const auto& e : edges)
    for (int r = rmin; r <= rmax; ++r) {
      const double cx = e.x - r * e.ux, cy = e.y - r * e.uy;
      if (cx < -0.5 || cy < -0.5 || cx >= w - 0.5 || cy >= h - 0.5) continue;
      const double wx = cx - window.cx, wy = cy - window.cy;
      if (window.radius >= 0 && wx * wx + wy * wy > window.radius * window.radius) continue;
      const auto ix = static_cast<Eigen::Index>((cx + 0.5) / kCell);
      const auto iy = static_cast<Eigen::Index>((cy + 0.5) / kCell);
      acc[(static_cast<std::size_t>((r - rmin) / kBin) * ch + iy) * cw + ix] += 1.0f;
    }

  struct Peak {
    double strength;
    std::size_t index;
  };
  std::vector<Peak> peaks;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i] < 3.0f) continue;
    const int bin = static_cast<int>(i / (cw * ch));
    const double r = rmin + kBin * (bin + 0.5);
    peaks.push_back({acc[i] / (2 * std::numbers::pi * r), i});
  }
  const std::size_t keep = std::min<std::size_t>(peaks.size(), 4000);
  std::partial_sort(peaks.begin(), peaks.begin() + keep, peaks.end(), [](const Peak& a, const Peak& b) {
    return a.strength > b.strength || (a.strength == b.strength && a.index < b.index);
  });
  peaks.resize(keep);
  std::vector<Eigen::Vector2d> chosen;
  for (const auto& pk : peaks) {
    const std::size_t cell = pk.index % static_cast<std::size_t>(cw * ch);
    const Eigen::Vector2d p(double(cell % cw) * kCell + 0.5 * (kCell - 1), double(cell / cw) * kCell + 0.5 * (kCell - 1));
    bool near = false;
    for (const auto& q : chosen) near = near || (p - q).norm() < 4.0;
    if (near) continue;
    chosen.push_back(p);
    if (static_cast<int>(chosen.size()) >= n_peaks) break;
  }

  std::vector<Circle> circles = seeds;
  for (const auto& p : chosen)
    if (auto c = fit_at_centre(edges, p.x(), p.y(), rmin, rmax)) circles.push_back(*c);

  std::optional<Candidate> best;
  std::vector<Circle> seen;
  for (const auto& c : circles) {
    const bool repeat = std::any_of(seen.begin(), seen.end(), [&](const Circle& q) {
      return std::hypot(q.cx - c.cx, q.cy - c.cy) < 2.0 && std::abs(q.r - c.r) < 2.0;
    });
    if (repeat) continue;
    seen.push_back(c);
    const Candidate cand = score_circle(gray, smooth, c, rmin, rmax, dark_prior);
    if (cand.score <= 0.0) continue;
    if (cand.circle.r < rmin - 2 || cand.circle.r > rmax + 2) continue;
    if (!best || cand.score > best->score) best = cand;
  }
  return best;
}

}  // namespace

SegmentationResult classical_localize(const Raster& gray_in, const LocalizerParams& params) {
  const Raster gray_r = to_grayscale(gray_in);
  const Plane<double>& gray = gray_r.channel(0);
  const int w = gray_r.width(), h = gray_r.height();
  if (std::min(w, h) < 64) throw ParameterError("classical localization needs at least 64x64 pixels");

  const Plane<double> smooth = gaussian_blur(gray, params.smooth_sigma);
  const std::vector<Edge> edges = detect_edges(smooth, params);
  if (edges.size() < 16) throw LocalizationError("no boundary evidence in image");

  const double mdim = std::min(w, h);
  const int pmin = std::max(3, static_cast<int>(std::floor(params.pupil_min_fraction * mdim)));
  const int pmax = static_cast<int>(std::ceil(params.pupil_max_fraction * mdim));
  const auto pupil = hough_search(edges, gray, smooth, pmin, pmax, {0, 0, -1}, 8, true,
                                 dark_blob_seeds(smooth, pmin, pmax));
  if (!pupil || pupil->coverage < params.min_support) throw LocalizationError("no pupil boundary found");
  const Circle pc = pupil->circle;

  std::vector<Edge> outer;
  for (const auto& e : edges)
    if (std::hypot(e.x - pc.cx, e.y - pc.cy) > 1.2 * pc.r) outer.push_back(e);
  const int imin = static_cast<int>(std::floor(params.iris_min_ratio * pc.r));
  const int imax = std::min(static_cast<int>(std::ceil(params.iris_max_ratio * pc.r)), static_cast<int>(std::hypot(w, h)));
  const auto iris = hough_search(outer, gray, smooth, imin, imax, {pc.cx, pc.cy, std::max(3.0, 0.5 * pc.r)}, 8, false);
  if (!iris || iris->coverage < params.min_support) throw LocalizationError("no limbus boundary found");
  const Circle ic = iris->circle;

  SegmentationResult res;
  res.pupil = make_circle(pc.cx, pc.cy, pc.r);
  res.iris = make_circle(ic.cx, ic.cy, ic.r);
  res.iris_mask = rasterize_ellipse(res.iris, w, h);
  res.pupil_mask = rasterize_ellipse(res.pupil, w, h);
  res.source = SegmentationSource::Classical;
  return enforce_containment(std::move(res));
}

}  // namespace viris
