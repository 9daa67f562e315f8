#pragma once

#include "guardscan/geometry.hpp"
#include "guardscan/image.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>

namespace guardscan {

class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads PNG (8-bit gray/RGB, palette and alpha are converted) or binary PGM/PPM (P5/P6, maxval
/// up to 255). Intensities are v / 255 for PNG and v / maxval for PNM. Errors carry the path.
Image load_image(const std::filesystem::path& path);

/// Decodes an in-memory PGM/PPM file; `origin` is used in error messages only.
Image decode_pnm(std::span<const unsigned char> bytes, const std::string& origin);

/// Writes 8-bit PNG (gray or RGB) with values round(v * 255). Output is byte-deterministic.
void save_png(const Image& img, const std::filesystem::path& path);

/// Rounds every intensity to the nearest 8-bit level.
void quantize_8bit(Image& img);

using Rgb = std::array<double, 3>;

namespace colors {
inline constexpr Rgb blue{0.0, 0.0, 1.0};
inline constexpr Rgb red{1.0, 0.0, 0.0};
inline constexpr Rgb green{0.0, 1.0, 0.0};
inline constexpr Rgb white{1.0, 1.0, 1.0};
}  // namespace colors

Image to_rgb(const Image& img);

/// 2-px outline drawn inside the box, clipped to the image. img must be RGB.
void draw_box(Image& img, const BoundingBox& box, const Rgb& color);

/// Line y = slope * x + intercept across the full width, 1 px thick.
void draw_row_line(Image& img, double slope, double intercept, const Rgb& color);

}  // namespace guardscan
