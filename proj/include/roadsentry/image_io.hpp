#pragma once

#include "roadsentry/core.hpp"
#include "roadsentry/vision_prep.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>

namespace roadsentry {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kRed{255, 0, 0};
inline constexpr Rgb kBlue{0, 0, 255};
inline constexpr Rgb kGreen{0, 255, 0};

/// Reads an 8-bit PNG as gray (1 channel) or RGB (3 channels); alpha is
/// dropped and palette/16-bit images are converted. Throws DataError.
ImageBuffer read_png(const std::filesystem::path& path);

/// Writes gray or RGB 8-bit PNG. Throws DataError.
void write_png(const std::filesystem::path& path, const ImageBuffer& img);

/// Maps a {0,1} mask to {0,255} for viewing.
ImageBuffer mask_to_gray(const ImageBuffer& mask);

ImageBuffer to_rgb(const ImageBuffer& img);

void draw_rect(ImageBuffer& rgb, double x, double y, double w, double h, Rgb color, int thickness = 2);
void draw_polyline(ImageBuffer& rgb, std::span<const PixelPoint> pts, bool closed, Rgb color, int thickness = 2);

}  // namespace roadsentry
