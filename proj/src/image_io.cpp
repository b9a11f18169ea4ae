#include "roadsentry/image_io.hpp"

#include "roadsentry/error.hpp"

#include <fmt/format.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

namespace roadsentry {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_pixel(ImageBuffer& img, int x, int y, Rgb color) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
}

void draw_segment(ImageBuffer& img, PixelPoint a, PixelPoint b, Rgb color, int thickness) {
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len)));
  const int r = std::max(0, thickness / 2);
  for (int i = 0; i <= steps; ++i) {
    const PixelPoint p = a + (b - a) * (static_cast<double>(i) / steps);
    const int px = static_cast<int>(std::lround(p.x()));
    const int py = static_cast<int>(std::lround(p.y()));
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) put_pixel(img, px + dx, py + dy, color);
    }
  }
}

}  // namespace

ImageBuffer read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DataError(fmt::format("cannot open image {}", path.string()));

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng initialisation failed");
  }
  // Declared before setjmp so a libpng longjmp never skips their construction.
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  int width = 0;
  int height = 0;
  int channels = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(fmt::format("{} is not a readable PNG", path.string()));
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  pixels.resize(row_bytes * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = pixels.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) {
    throw DataError(fmt::format("{} has an unsupported channel count {}", path.string(), channels));
  }
  return ImageBuffer(width, height, channels, std::move(pixels));
}

void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw DataError(fmt::format("cannot write image {}", path.string()));

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError(fmt::format("failed writing {}", path.string()));
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, img.width(), img.height(), 8,
               img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t row_bytes = static_cast<std::size_t>(img.width()) * img.channels();
  for (int y = 0; y < img.height(); ++y) {
    png_write_row(png, img.data().data() + y * row_bytes);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageBuffer mask_to_gray(const ImageBuffer& mask) {
  ImageBuffer out = mask;
  for (auto& v : out.data()) v = v ? 255 : 0;
  return out;
}

ImageBuffer to_rgb(const ImageBuffer& img) {
  if (img.channels() == 3) return img;
  ImageBuffer out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y);
    }
  }
  return out;
}

void draw_rect(ImageBuffer& rgb, double x, double y, double w, double h, Rgb color, int thickness) {
  const std::array<PixelPoint, 4> corners{PixelPoint(x, y), PixelPoint(x + w, y), PixelPoint(x + w, y + h),
                                          PixelPoint(x, y + h)};
  draw_polyline(rgb, corners, true, color, thickness);
}

void draw_polyline(ImageBuffer& rgb, std::span<const PixelPoint> pts, bool closed, Rgb color, int thickness) {
  if (rgb.channels() != 3) throw std::invalid_argument("overlays are drawn on RGB images");
  if (pts.size() < 2) return;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) draw_segment(rgb, pts[i], pts[i + 1], color, thickness);
  if (closed) draw_segment(rgb, pts.back(), pts.front(), color, thickness);
}

}  // namespace roadsentry
