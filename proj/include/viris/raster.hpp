#pragma once

#include <Eigen/Core>

#include <cmath>
#include <utility>
#include <vector>

#include "viris/errors.hpp"

namespace viris {

/// Row-major 2-D array; element (y, x) is row y, column x.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major boolean mask; `true` is foreground.
using BinaryMask = Plane<bool>;

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

/// Pixel coordinates. Pixel (i, j) has its center at (i, j).
using PointPx = Point2<double>;

/// Multi-channel intensity image with values in [0, 1], stored one plane
/// per channel. Channel order for colour images is R, G, B.
template <typename Scalar>
class BasicRaster {
 public:
  BasicRaster(int width, int height, int channels, Scalar fill = Scalar(0)) {
    if (width < 1 || height < 1)
      throw ParameterError("raster dimensions must be at least 1x1");
    if (channels != 1 && channels != 3)
      throw ParameterError("raster must have 1 or 3 channels");
    planes_.assign(channels, Plane<Scalar>::Constant(height, width, fill));
  }

  explicit BasicRaster(Plane<Scalar> gray) {
    if (gray.rows() < 1 || gray.cols() < 1)
      throw ParameterError("raster dimensions must be at least 1x1");
    planes_.push_back(std::move(gray));
  }

  explicit BasicRaster(std::vector<Plane<Scalar>> planes) : planes_(std::move(planes)) {
    if (planes_.size() != 1 && planes_.size() != 3)
      throw ParameterError("raster must have 1 or 3 channels");
    for (const auto& p : planes_) {
      if (p.rows() < 1 || p.cols() < 1)
        throw ParameterError("raster dimensions must be at least 1x1");
      if (p.rows() != planes_.front().rows() || p.cols() != planes_.front().cols())
        throw ParameterError("raster channels must share dimensions");
    }
  }

  int width() const { return static_cast<int>(planes_.front().cols()); }
  int height() const { return static_cast<int>(planes_.front().rows()); }
  int channels() const { return static_cast<int>(planes_.size()); }

  const Plane<Scalar>& channel(int c) const { return planes_.at(c); }
  Plane<Scalar>& channel(int c) { return planes_.at(c); }

  Scalar operator()(int x, int y, int c = 0) const { return planes_[c](y, x); }
  Scalar& operator()(int x, int y, int c = 0) { return planes_[c](y, x); }

  /// True when every sample is finite and inside [0, 1].
  bool in_range() const {
    for (const auto& p : planes_)
      if (!p.isFinite().all() || (p < Scalar(0)).any() || (p > Scalar(1)).any()) return false;
    return true;
  }

  void clamp() {
    for (auto& p : planes_) p = p.max(Scalar(0)).min(Scalar(1));
  }

 private:
  std::vector<Plane<Scalar>> planes_;
};

using Raster = BasicRaster<double>;

struct ScalePair {
  double sx = 1.0;
  double sy = 1.0;
};

/// Axis-aligned box in pixel indices: columns [x0, x0 + w), rows [y0, y0 + h).
struct BBox {
  double x0 = 0, y0 = 0;
  double w = 0, h = 0;
};

/// BT.601 luma; single-channel input is returned unchanged.
Raster to_grayscale(const Raster& img);

Raster extract_red_channel(const Raster& img);

/// out = clamp(gain * in^gamma, 0, 1), elementwise.
Raster gamma_correct(const Raster& img, double gamma, double gain = 1.0);

/// 4-neighbour Laplacian with replicated borders.
Plane<double> laplacian_response(const Plane<double>& img);

/// Population standard deviation of the Laplacian response over all pixels,
/// in the raster's own intensity units.
double laplacian_sharpness(const Raster& img);

/// Same measure on intensities mapped to [0, 255]; this is the scale the
/// capture sharpness gate and the ISO sharpness score use.
inline double laplacian_sharpness_8bit(const Raster& img) { return 255.0 * laplacian_sharpness(img); }

/// Separable Gaussian blur, kernel truncated at ceil(4 sigma), replicated borders.
Plane<double> gaussian_blur(const Plane<double>& img, double sigma);
Raster gaussian_blur(const Raster& img, double sigma);

/// Bilinear sample at fractional pixel coordinates; coordinates outside
/// the pixel-center hull are clamped to the border.
double sample_bilinear(const Plane<double>& img, double x, double y);

ScalePair scale_factors(int orig_w, int orig_h, int resized_w, int resized_h);

inline PointPx remap_point(const PointPx& p, const ScalePair& s) { return {p.x() * s.sx, p.y() * s.sy}; }

inline BBox remap_bbox(const BBox& b, const ScalePair& s) {
  return {b.x0 * s.sx, b.y0 * s.sy, b.w * s.sx, b.h * s.sy};
}

/// Expands `roi` about its centre to the output aspect, fits it inside the
/// image, and bilinearly resamples to out_w x out_h.
Raster crop_standardize(const Raster& img, const BBox& roi, int out_w = 640, int out_h = 480);

}  // namespace viris
