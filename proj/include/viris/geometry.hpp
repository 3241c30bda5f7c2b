#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "viris/errors.hpp"
#include "viris/raster.hpp"

namespace viris {

/// Ellipse with centre (cx, cy), semi-axes rx, ry and orientation alpha of
/// the rx axis, measured in image coordinates (x right, y down).
/// Canonical form: rx >= ry > 0, alpha in [0, pi), alpha = 0 for circles.
template <typename Scalar>
struct Ellipse {
  Scalar cx{}, cy{}, rx{}, ry{}, alpha{};

  Point2<Scalar> center() const { return {cx, cy}; }
  Point2<Scalar> major_axis() const { return {std::cos(alpha), std::sin(alpha)}; }
  Point2<Scalar> minor_axis() const { return {-std::sin(alpha), std::cos(alpha)}; }

  /// Point at parametric angle t.
  Point2<Scalar> point_at(Scalar t) const {
    return center() + rx * std::cos(t) * major_axis() + ry * std::sin(t) * minor_axis();
  }

  /// Centre-to-boundary distance along the unit direction `dir`.
  Scalar radius_along(const Point2<Scalar>& dir) const {
    const Scalar u = dir.dot(major_axis()) / rx;
    const Scalar v = dir.dot(minor_axis()) / ry;
    return Scalar(1) / std::sqrt(u * u + v * v);
  }

  /// Normalised implicit value: < 1 inside, 1 on the boundary.
  Scalar implicit(const Point2<Scalar>& p) const {
    const Point2<Scalar> d = p - center();
    const Scalar u = d.dot(major_axis()) / rx;
    const Scalar v = d.dot(minor_axis()) / ry;
    return u * u + v * v;
  }

  bool contains(const Point2<Scalar>& p) const { return implicit(p) <= Scalar(1); }

  /// Radius used by scalar quality measures.
  Scalar mean_radius() const { return (rx + ry) / Scalar(2); }

  /// Half-widths of the axis-aligned bounding box.
  Point2<Scalar> half_extent() const {
    const Scalar c = std::cos(alpha), s = std::sin(alpha);
    return {std::sqrt(rx * rx * c * c + ry * ry * s * s), std::sqrt(rx * rx * s * s + ry * ry * c * c)};
  }

  bool valid() const {
    return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(rx) && std::isfinite(ry) &&
           std::isfinite(alpha) && rx > Scalar(0) && ry > Scalar(0);
  }
};

template <typename Scalar>
Ellipse<Scalar> canonicalize(Ellipse<Scalar> e) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (e.rx < e.ry) {
    std::swap(e.rx, e.ry);
    e.alpha += pi / 2;
  }
  e.alpha = std::fmod(e.alpha, pi);
  if (e.alpha < Scalar(0)) e.alpha += pi;
  if (e.alpha >= pi) e.alpha = Scalar(0);
  if (e.rx - e.ry <= Scalar(1e-9) * e.rx) e.alpha = Scalar(0);
  return e;
}

template <typename Scalar>
Ellipse<Scalar> make_circle(Scalar cx, Scalar cy, Scalar r) {
  return {cx, cy, r, r, Scalar(0)};
}

/// Converts A x^2 + B xy + C y^2 + D x + E y + F = 0 to a canonical ellipse.
template <typename Scalar>
Ellipse<Scalar> conic_to_ellipse(const Eigen::Matrix<Scalar, 6, 1>& conic) {
  const Scalar A = conic(0), B = conic(1), C = conic(2), D = conic(3), E = conic(4), F = conic(5);
  const Scalar den = 4 * A * C - B * B;
  if (!(den > Scalar(0))) throw FitError("conic is not an ellipse");
  const Scalar x0 = (B * E - 2 * C * D) / den;
  const Scalar y0 = (B * D - 2 * A * E) / den;
  const Scalar f0 = A * x0 * x0 + B * x0 * y0 + C * y0 * y0 + D * x0 + E * y0 + F;

  Eigen::Matrix<Scalar, 2, 2> quad;
  quad << A, B / 2, B / 2, C;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 2, 2>> es(quad);
  const auto& lambda = es.eigenvalues();
  const Scalar q0 = -f0 / lambda(0);
  const Scalar q1 = -f0 / lambda(1);
  if (!(q0 > Scalar(0)) || !(q1 > Scalar(0))) throw FitError("conic has no real points");
  const Scalar r0 = std::sqrt(q0), r1 = std::sqrt(q1);
  const int major = r0 >= r1 ? 0 : 1;
  const Point2<Scalar> axis = es.eigenvectors().col(major);
  Ellipse<Scalar> e{x0, y0, std::max(r0, r1), std::min(r0, r1), std::atan2(axis.y(), axis.x())};
  if (!e.valid()) throw FitError("conic parameters are not finite");
  return canonicalize(e);
}

/// Direct least-squares ellipse fit with the 4AC - B^2 = 1 constraint, in the
/// numerically stable block form, on centred and scaled points.
template <typename Scalar>
Ellipse<Scalar> fit_ellipse_lsq(const std::vector<Point2<Scalar>>& points) {
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 6) throw FitError("ellipse fit needs at least 6 points");

  Point2<Scalar> mean = Point2<Scalar>::Zero();
  for (const auto& p : points) mean += p;
  mean /= Scalar(n);
  Scalar spread = 0;
  for (const auto& p : points) spread += (p - mean).squaredNorm();
  spread = std::sqrt(spread / Scalar(n));
  if (!(spread > Scalar(0)) || !std::isfinite(spread)) throw FitError("ellipse fit points are coincident");
  const Scalar scale = std::sqrt(Scalar(2)) / spread;

  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> d1(n, 3), d2(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point2<Scalar> q = (points[i] - mean) * scale;
    d1.row(i) << q.x() * q.x(), q.x() * q.y(), q.y() * q.y();
    d2.row(i) << q.x(), q.y(), Scalar(1);
  }
  const Mat3 s1 = d1.transpose() * d1;
  const Mat3 s2 = d1.transpose() * d2;
  const Mat3 s3 = d2.transpose() * d2;
  Eigen::FullPivLU<Mat3> s3_lu(s3);
  s3_lu.setThreshold(Scalar(1e-12));
  if (s3_lu.rank() < 3) throw FitError("ellipse fit points are collinear");
  const Mat3 t = -s3_lu.solve(s2.transpose());
  const Mat3 m = s1 + s2 * t;
  Mat3 reduced;
  reduced.row(0) = m.row(2) / Scalar(2);
  reduced.row(1) = -m.row(1);
  reduced.row(2) = m.row(0) / Scalar(2);

  Eigen::EigenSolver<Mat3> es(reduced);
  int best = -1;
  Scalar best_value = 0;
  for (int k = 0; k < 3; ++k) {
    const auto vec = es.eigenvectors().col(k);
    if (vec.imag().norm() > Scalar(1e-9) * vec.real().norm()) continue;
    const Vec3 a = vec.real();
    const Scalar constraint = 4 * a(0) * a(2) - a(1) * a(1);
    if (!(constraint > Scalar(0))) continue;
    const Scalar value = std::abs(es.eigenvalues()(k).real());
    if (best < 0 || value < best_value) {
      best = k;
      best_value = value;
    }
  }
  if (best < 0) throw FitError("no elliptical solution for the points");
  const Vec3 a1 = es.eigenvectors().col(best).real();
  const Vec3 a2 = t * a1;
  Eigen::Matrix<Scalar, 6, 1> conic;
  conic << a1, a2;

  Ellipse<Scalar> e = conic_to_ellipse(conic);
  e.cx = e.cx / scale + mean.x();
  e.cy = e.cy / scale + mean.y();
  e.rx /= scale;
  e.ry /= scale;
  return canonicalize(e);
}

/// (cx/W, cy/H, rx/W, ry/H, sin alpha, cos alpha)
template <typename Scalar>
using EllipseEncoding = Eigen::Matrix<Scalar, 6, 1>;

template <typename Scalar>
EllipseEncoding<Scalar> encode_ellipse(const Ellipse<Scalar>& e, Scalar width, Scalar height) {
  if (!(width > Scalar(0)) || !(height > Scalar(0))) throw ParameterError("encoding frame must be positive");
  const Ellipse<Scalar> c = canonicalize(e);
  EllipseEncoding<Scalar> enc;
  enc << c.cx / width, c.cy / height, c.rx / width, c.ry / height, std::sin(c.alpha), std::cos(c.alpha);
  return enc;
}

template <typename Scalar>
Ellipse<Scalar> decode_ellipse(const EllipseEncoding<Scalar>& enc, Scalar width, Scalar height) {
  if (!(width > Scalar(0)) || !(height > Scalar(0))) throw ParameterError("encoding frame must be positive");
  const Scalar norm = std::hypot(enc(4), enc(5));
  if (!(norm > Scalar(0)) || !enc.allFinite()) throw ParameterError("degenerate orientation encoding");
  Ellipse<Scalar> e{enc(0) * width, enc(1) * height, enc(2) * width, enc(3) * height,
                    std::atan2(enc(4) / norm, enc(5) / norm)};
  if (!e.valid()) throw ParameterError("encoded radii must be positive");
  return canonicalize(e);
}

// ---------------------------------------------------------------------------
// Mask-derived targets

/// Foreground pixels with at least one background 4-neighbour (outside of
/// the frame counts as background), as pixel-centre coordinates.
std::vector<PointPx> mask_to_boundary_points(const BinaryMask& mask);

/// Sub-pixel contour samples: the midpoint of every edge shared by a
/// foreground pixel and an in-frame background 4-neighbour.
std::vector<PointPx> mask_edge_points(const BinaryMask& mask);

/// Boundary indicator blurred by a Gaussian of `sigma`, rescaled to peak 1.
Plane<double> soft_boundary(const BinaryMask& mask, double sigma = 1.5);

/// sign * min(d, clip) / clip with d the Euclidean distance to the nearest
/// pixel of the opposite class; positive inside the mask.
Plane<double> signed_distance_transform(const BinaryMask& mask, double clip_radius = 16.0);

/// Exact squared Euclidean distance from every pixel to the nearest `true` pixel.
Plane<double> squared_distance_to(const BinaryMask& targets);

/// Pixels whose centres satisfy the ellipse's implicit inequality.
BinaryMask rasterize_ellipse(const Ellipse<double>& e, int width, int height);

/// Root-mean-square distance from the points to the ellipse, measured
/// along rays from the centre.
double ellipse_rms_residual(const Ellipse<double>& e, const std::vector<PointPx>& points);

struct ContainmentResult {
  bool contained = false;
  /// Pixel count of the rasterised pupil outside the (shrunken) iris.
  double violation_area = 0.0;
};

/// Checks 256 pupil boundary samples against the iris shrunk by `margin` px.
ContainmentResult containment_check(const Ellipse<double>& pupil, const Ellipse<double>& iris, double margin = 0.0);

}  // namespace viris
