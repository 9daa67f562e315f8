#pragma once

#include <cstddef>
#include <vector>

namespace guardscan {

/// Row-major, channel-interleaved raster of intensities in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0);

    double& at(int x, int y, int c = 0)
    {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c = 0) const
    {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    bool empty() const { return data.empty(); }

    /// Throws std::invalid_argument if dimensions, length or value range are wrong.
    void validate() const;

    bool operator==(const Image&) const = default;
};

/// Signed centred derivatives of a single-channel image, with polar form.
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> dx;
    std::vector<double> dy;
    std::vector<double> magnitude;
    std::vector<double> orientation;  // unsigned, degrees in [0, 180)

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

/// Unsigned gradient orientation in degrees, [0, 180).
double unsigned_orientation(double dx, double dy);

/// Luminance 0.299 R + 0.587 G + 0.114 B; single-channel input is returned as is.
Image to_grayscale(const Image& img);

/// [-1, 0, 1] differences, one-sided at the borders. Requires 1 channel and at least 3x3.
GradientField gradient(const Image& img);

/// Copy of the w x h region starting at (x, y). The region must lie inside the image.
Image crop(const Image& img, int x, int y, int w, int h);

Image transpose(const Image& img);

}  // namespace guardscan
