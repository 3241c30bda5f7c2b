#include "viris/geometry.hpp"

#include <algorithm>
#include <limits>

namespace viris {

namespace {

bool fg(const BinaryMask& m, Eigen::Index y, Eigen::Index x) {
  return y >= 0 && x >= 0 && y < m.rows() && x < m.cols() && m(y, x);
}

BinaryMask boundary_indicator(const BinaryMask& mask) {
  BinaryMask b = BinaryMask::Constant(mask.rows(), mask.cols(), false);
  for (Eigen::Index y = 0; y < mask.rows(); ++y)
    for (Eigen::Index x = 0; x < mask.cols(); ++x)
      if (mask(y, x) && (!fg(mask, y - 1, x) || !fg(mask, y + 1, x) || !fg(mask, y, x - 1) || !fg(mask, y, x + 1)))
        b(y, x) = true;
  return b;
}

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) on one line.
void distance_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    auto meet = [&](int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p)); };
    double s = meet(v[k]);
    while (s <= z[k]) {
      --k;
      s = meet(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<PointPx> mask_to_boundary_points(const BinaryMask& mask) {
  std::vector<PointPx> pts;
  const BinaryMask b = boundary_indicator(mask);
  for (Eigen::Index y = 0; y < b.rows(); ++y)
    for (Eigen::Index x = 0; x < b.cols(); ++x)
      if (b(y, x)) pts.emplace_back(double(x), double(y));
  if (pts.empty()) throw ParameterError("mask is empty");
  return pts;
}

std::vector<PointPx> mask_edge_points(const BinaryMask& mask) {
  std::vector<PointPx> pts;
  const Eigen::Index h = mask.rows(), w = mask.cols();
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      if (x > 0 && !mask(y, x - 1)) pts.emplace_back(x - 0.5, double(y));
      if (x + 1 < w && !mask(y, x + 1)) pts.emplace_back(x + 0.5, double(y));
      if (y > 0 && !mask(y - 1, x)) pts.emplace_back(double(x), y - 0.5);
      if (y + 1 < h && !mask(y + 1, x)) pts.emplace_back(double(x), y + 0.5);
    }
  return pts;
}

Plane<double> soft_boundary(const BinaryMask& mask, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("soft boundary sigma must be positive");
  if (!mask.any()) throw ParameterError("mask is empty");
  const Plane<double> indicator = boundary_indicator(mask).cast<double>();
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  Eigen::ArrayXd k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k(i + radius) = std::exp(-0.5 * i * i / (sigma * sigma));
  k /= k.sum();

  // Zero padding: nothing outside the frame contributes.
  const Eigen::Index h = mask.rows(), w = mask.cols();
  Plane<double> tmp = Plane<double>::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      if (indicator(y, x) == 0.0) continue;
      for (int i = -radius; i <= radius; ++i) {
        const Eigen::Index xx = x + i;
        if (xx >= 0 && xx < w) tmp(y, xx) += k(i + radius);
      }
    }
  Plane<double> out = Plane<double>::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      const double v = tmp(y, x);
      if (v == 0.0) continue;
      for (int i = -radius; i <= radius; ++i) {
        const Eigen::Index yy = y + i;
        if (yy >= 0 && yy < h) out(yy, x) += v * k(i + radius);
      }
    }
  return out / out.maxCoeff();
}

Plane<double> squared_distance_to(const BinaryMask& targets) {
  const Eigen::Index h = targets.rows(), w = targets.cols();
  constexpr double inf = 1e20;
  Plane<double> grid(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) grid(y, x) = targets(y, x) ? 0.0 : inf;

  const auto n = static_cast<std::size_t>(std::max(h, w));
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (Eigen::Index x = 0; x < w; ++x) {
    f.resize(h);
    d.resize(h);
    for (Eigen::Index y = 0; y < h; ++y) f[y] = grid(y, x);
    distance_1d(f, d, v, z);
    for (Eigen::Index y = 0; y < h; ++y) grid(y, x) = d[y];
  }
  for (Eigen::Index y = 0; y < h; ++y) {
    f.resize(w);
    d.resize(w);
    for (Eigen::Index x = 0; x < w; ++x) f[x] = grid(y, x);
    distance_1d(f, d, v, z);
    for (Eigen::Index x = 0; x < w; ++x) grid(y, x) = d[x];
  }
  return grid;
}

Plane<double> signed_distance_transform(const BinaryMask& mask, double clip_radius) {
  if (!(clip_radius > 0.0)) throw ParameterError("clip radius must be positive");
  if (mask.all() || !mask.any()) throw ParameterError("signed distance needs both foreground and background");
  const Plane<double> to_background = squared_distance_to(!mask).sqrt();
  const Plane<double> to_foreground = squared_distance_to(mask).sqrt();
  return mask.select(to_background.min(clip_radius), -to_foreground.min(clip_radius)) / clip_radius;
}

BinaryMask rasterize_ellipse(const Ellipse<double>& e, int width, int height) {
  BinaryMask m = BinaryMask::Constant(height, width, false);
  const PointPx ext = e.half_extent();
  const int x0 = std::max(0, static_cast<int>(std::floor(e.cx - ext.x())));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(e.cx + ext.x())));
  const int y0 = std::max(0, static_cast<int>(std::floor(e.cy - ext.y())));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(e.cy + ext.y())));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m(y, x) = e.contains(PointPx(x, y));
  return m;
}

double ellipse_rms_residual(const Ellipse<double>& e, const std::vector<PointPx>& points) {
  if (points.empty()) throw ParameterError("no points for residual");
  double acc = 0.0;
  for (const auto& p : points) {
    const PointPx d = p - e.center();
    const double r = d.norm();
    const double boundary = r > 0.0 ? e.radius_along(d / r) : e.ry;
    acc += (r - boundary) * (r - boundary);
  }
  return std::sqrt(acc / points.size());
}

ContainmentResult containment_check(const Ellipse<double>& pupil, const Ellipse<double>& iris, double margin) {
  ContainmentResult res;
  Ellipse<double> shrunk = iris;
  shrunk.rx -= margin;
  shrunk.ry -= margin;
  const bool shrunk_valid = shrunk.rx > 0.0 && shrunk.ry > 0.0;

  res.contained = shrunk_valid;
  if (shrunk_valid) {
    constexpr int kSamples = 256;
    for (int k = 0; k < kSamples; ++k) {
      const double t = 2.0 * std::numbers::pi * k / kSamples;
      if (shrunk.implicit(pupil.point_at(t)) > 1.0 + 1e-9) {
        res.contained = false;
        break;
      }
    }
  }

  const PointPx ext = pupil.half_extent();
  const int x0 = static_cast<int>(std::floor(pupil.cx - ext.x()));
  const int x1 = static_cast<int>(std::ceil(pupil.cx + ext.x()));
  const int y0 = static_cast<int>(std::floor(pupil.cy - ext.y()));
  const int y1 = static_cast<int>(std::ceil(pupil.cy + ext.y()));
  long count = 0;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const PointPx p(x, y);
      if (pupil.contains(p) && (!shrunk_valid || !shrunk.contains(p))) ++count;
    }
  res.violation_area = static_cast<double>(count);
  return res;
}

}  // namespace viris
