#include "viris/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace viris {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_rows(const std::filesystem::path& path, int width, int height, int color_type, int depth,
                const std::vector<std::vector<png_byte>>& rows) {
  FilePtr f = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  if (!png) throw IoError("png: cannot allocate writer");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> row_ptrs;
  for (const auto& r : rows) row_ptrs.push_back(const_cast<png_bytep>(r.data()));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png write failed for " + path.string() + ": " + error);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Raster load_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw IoError("not a PNG file: " + path.string());

  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  if (!png) throw IoError("png: cannot allocate reader");
  png_infop info = png_create_info_struct(png);
  std::vector<std::vector<png_byte>> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png read failed for " + path.string() + ": " + error);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  rows.assign(height, std::vector<png_byte>(png_get_rowbytes(png, info)));
  std::vector<png_bytep> row_ptrs;
  for (auto& r : rows) row_ptrs.push_back(r.data());
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const int out_channels = channels >= 3 ? 3 : 1;
  const double full = out_depth == 16 ? 65535.0 : 255.0;
  Raster img(width, height, out_channels);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < out_channels; ++c) {
        const std::size_t i = static_cast<std::size_t>(x) * channels + c;
        double v;
        if (out_depth == 16) {
          const auto* p = reinterpret_cast<const std::uint16_t*>(rows[y].data());
          v = p[i];
        } else {
          v = rows[y][i];
        }
        img(x, y, c) = v / full;
      }
  return img;
}

void save_png(const Raster& img, const std::filesystem::path& path) {
  const int ch = img.channels();
  std::vector<std::vector<png_byte>> rows(img.height(), std::vector<png_byte>(img.width() * ch));
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < ch; ++c) rows[y][x * ch + c] = to_u8(img(x, y, c));
  write_rows(path, img.width(), img.height(), ch == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, 8, rows);
}

void save_png16(const Plane<double>& img, const std::filesystem::path& path) {
  std::vector<std::vector<png_byte>> rows(img.rows(), std::vector<png_byte>(img.cols() * 2));
  for (Eigen::Index y = 0; y < img.rows(); ++y)
    for (Eigen::Index x = 0; x < img.cols(); ++x) {
      const auto v = static_cast<std::uint16_t>(std::lround(std::clamp(img(y, x), 0.0, 1.0) * 65535.0));
      rows[y][2 * x] = static_cast<png_byte>(v >> 8);
      rows[y][2 * x + 1] = static_cast<png_byte>(v & 0xff);
    }
  write_rows(path, static_cast<int>(img.cols()), static_cast<int>(img.rows()), PNG_COLOR_TYPE_GRAY, 16, rows);
}

BinaryMask load_mask_png(const std::filesystem::path& path) {
  const Raster r = load_png(path);
  return to_grayscale(r).channel(0) > 0.0;
}

void save_mask_png(const BinaryMask& mask, const std::filesystem::path& path) {
  save_png(mask_to_raster(mask), path);
}

Raster mask_to_raster(const BinaryMask& mask) { return Raster(mask.cast<double>().eval()); }

}  // namespace viris
