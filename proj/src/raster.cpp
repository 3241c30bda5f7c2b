#include "viris/raster.hpp"

#include <algorithm>
#include <cmath>

namespace viris {

Raster to_grayscale(const Raster& img) {
  if (img.channels() == 1) return img;
  Plane<double> gray = 0.299 * img.channel(0) + 0.587 * img.channel(1) + 0.114 * img.channel(2);
  return Raster(gray.max(0.0).min(1.0).eval());
}

Raster extract_red_channel(const Raster& img) {
  if (img.channels() != 3) throw ParameterError("red extraction requires color input");
  return Raster(img.channel(0));
}

Raster gamma_correct(const Raster& img, double gamma, double gain) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
  if (!(gain > 0.0) || !std::isfinite(gain)) throw ParameterError("gamma gain must be positive");
  std::vector<Plane<double>> planes;
  for (int c = 0; c < img.channels(); ++c)
    planes.push_back((gain * img.channel(c).max(0.0).pow(gamma)).max(0.0).min(1.0));
  return Raster(std::move(planes));
}

Plane<double> laplacian_response(const Plane<double>& img) {
  const Eigen::Index h = img.rows();
  const Eigen::Index w = img.cols();
  Plane<double> out(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    const Eigen::Index yu = std::max<Eigen::Index>(y - 1, 0);
    const Eigen::Index yd = std::min<Eigen::Index>(y + 1, h - 1);
    for (Eigen::Index x = 0; x < w; ++x) {
      const Eigen::Index xl = std::max<Eigen::Index>(x - 1, 0);
      const Eigen::Index xr = std::min<Eigen::Index>(x + 1, w - 1);
      out(y, x) = img(yu, x) + img(yd, x) + img(y, xl) + img(y, xr) - 4.0 * img(y, x);
    }
  }
  return out;
}

double laplacian_sharpness(const Raster& img) {
  if (img.channels() != 1) throw ParameterError("sharpness requires a single-channel raster");
  if (std::min(img.width(), img.height()) < 3)
    throw ParameterError("image smaller than the 3x3 Laplacian kernel");
  const Plane<double> lap = laplacian_response(img.channel(0));
  const double mean = lap.mean();
  return std::sqrt((lap - mean).square().mean());
}

namespace {

Eigen::ArrayXd gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  Eigen::ArrayXd k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k(i + radius) = std::exp(-0.5 * i * i / (sigma * sigma));
  return k / k.sum();
}

}  // namespace

Plane<double> gaussian_blur(const Plane<double>& img, double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma)) throw ParameterError("blur sigma must be non-negative");
  if (sigma == 0.0) return img;
  const Eigen::ArrayXd k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const Eigen::Index h = img.rows();
  const Eigen::Index w = img.cols();

  Plane<double> tmp(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k(i + radius) * img(y, std::clamp<Eigen::Index>(x + i, 0, w - 1));
      tmp(y, x) = acc;
    }
  Plane<double> out(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k(i + radius) * tmp(std::clamp<Eigen::Index>(y + i, 0, h - 1), x);
      out(y, x) = acc;
    }
  return out;
}

Raster gaussian_blur(const Raster& img, double sigma) {
  std::vector<Plane<double>> planes;
  for (int c = 0; c < img.channels(); ++c) planes.push_back(gaussian_blur(img.channel(c), sigma));
  return Raster(std::move(planes));
}

double sample_bilinear(const Plane<double>& img, double x, double y) {
  const double w = static_cast<double>(img.cols());
  const double h = static_cast<double>(img.rows());
  x = std::clamp(x, 0.0, w - 1.0);
  y = std::clamp(y, 0.0, h - 1.0);
  const auto x0 = static_cast<Eigen::Index>(std::floor(x));
  const auto y0 = static_cast<Eigen::Index>(std::floor(y));
  const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, img.cols() - 1);
  const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, img.rows() - 1);
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  const double top = (1.0 - fx) * img(y0, x0) + fx * img(y0, x1);
  const double bottom = (1.0 - fx) * img(y1, x0) + fx * img(y1, x1);
  return (1.0 - fy) * top + fy * bottom;
}

ScalePair scale_factors(int orig_w, int orig_h, int resized_w, int resized_h) {
  if (orig_w < 1 || orig_h < 1 || resized_w < 1 || resized_h < 1)
    throw ParameterError("frame dimensions must be positive");
  return {static_cast<double>(orig_w) / resized_w, static_cast<double>(orig_h) / resized_h};
}

Raster crop_standardize(const Raster& img, const BBox& roi, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw ParameterError("output size must be positive");
  if (!(roi.w > 0.0) || !(roi.h > 0.0)) throw ParameterError("roi must have positive size");
  const double iw = img.width();
  const double ih = img.height();
  if (roi.x0 >= iw || roi.y0 >= ih || roi.x0 + roi.w <= 0.0 || roi.y0 + roi.h <= 0.0)
    throw ParameterError("roi lies outside the image");

  const double aspect = static_cast<double>(out_w) / out_h;
  double w = roi.w;
  double h = roi.h;
  if (w / h < aspect)
    w = h * aspect;
  else
    h = w / aspect;
  const double shrink = std::min({1.0, iw / w, ih / h});
  w *= shrink;
  h *= shrink;
  const double cx = roi.x0 + roi.w / 2.0;
  const double cy = roi.y0 + roi.h / 2.0;
  const double x0 = std::clamp(cx - w / 2.0, 0.0, iw - w);
  const double y0 = std::clamp(cy - h / 2.0, 0.0, ih - h);

  std::vector<Plane<double>> planes;
  for (int c = 0; c < img.channels(); ++c) {
    Plane<double> out(out_h, out_w);
    for (int v = 0; v < out_h; ++v) {
      const double sy = y0 - 0.5 + (v + 0.5) * h / out_h;
      for (int u = 0; u < out_w; ++u) {
        const double sx = x0 - 0.5 + (u + 0.5) * w / out_w;
        out(v, u) = sample_bilinear(img.channel(c), sx, sy);
      }
    }
    planes.push_back(std::move(out));
  }
  return Raster(std::move(planes));
}

}  // namespace viris
