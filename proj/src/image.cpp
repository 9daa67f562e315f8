#include "guardscan/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace guardscan {

Image::Image(int w, int h, int c, double fill)
    : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill)
{
}

void Image::validate() const
{
    if (width <= 0 || height <= 0) throw std::invalid_argument("image: dimensions must be positive");
    if (channels != 1 && channels != 3) throw std::invalid_argument("image: channels must be 1 or 3");
    if (data.size() != pixel_count() * channels)
        throw std::invalid_argument("image: data length does not match dimensions");
    for (double v : data) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw std::invalid_argument("image: intensity outside [0, 1]");
    }
}

double unsigned_orientation(double dx, double dy)
{
    double deg = std::atan2(dy, dx) * (180.0 / 3.14159265358979323846);
    if (deg < 0.0) deg += 180.0;
    if (deg >= 180.0) deg -= 180.0;
    // atan2 of (-0, -x) and rounding can land on 180 exactly.
    if (deg >= 180.0 || deg < 0.0) deg = 0.0;
    return deg;
}

Image to_grayscale(const Image& img)
{
    if (img.channels == 1) return img;
    if (img.channels != 3) throw std::invalid_argument("to_grayscale: channels must be 1 or 3");
    Image out(img.width, img.height, 1);
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = &img.data[i * 3];
        out.data[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
    return out;
}

GradientField gradient(const Image& img)
{
    if (img.channels != 1) throw std::invalid_argument("gradient: expected a single-channel image");
    if (img.width < 3 || img.height < 3)
        throw std::invalid_argument("gradient: image too small (" + std::to_string(img.width) + "x" +
                                    std::to_string(img.height) + ", need at least 3x3)");
    const int w = img.width;
    const int h = img.height;
    GradientField g;
    g.width = w;
    g.height = h;
    const std::size_t n = img.pixel_count();
    g.dx.resize(n);
    g.dy.resize(n);
    g.magnitude.resize(n);
    g.orientation.resize(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = g.index(x, y);
            double dx;
            if (x == 0)
                dx = img.at(1, y) - img.at(0, y);
            else if (x == w - 1)
                dx = img.at(w - 1, y) - img.at(w - 2, y);
            else
                dx = img.at(x + 1, y) - img.at(x - 1, y);
            double dy;
            if (y == 0)
                dy = img.at(x, 1) - img.at(x, 0);
            else if (y == h - 1)
                dy = img.at(x, h - 1) - img.at(x, h - 2);
            else
                dy = img.at(x, y + 1) - img.at(x, y - 1);
            g.dx[i] = dx;
            g.dy[i] = dy;
            g.magnitude[i] = std::sqrt(dx * dx + dy * dy);
            g.orientation[i] = unsigned_orientation(dx, dy);
        }
    }
    return g;
}

Image crop(const Image& img, int x, int y, int w, int h)
{
    if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > img.width || y + h > img.height)
        throw std::invalid_argument("crop: region outside image");
    Image out(w, h, img.channels);
    const std::size_t row = static_cast<std::size_t>(w) * img.channels;
    for (int r = 0; r < h; ++r) {
        const double* src = &img.data[(static_cast<std::size_t>(y + r) * img.width + x) * img.channels];
        std::copy(src, src + row, out.data.begin() + static_cast<std::ptrdiff_t>(r * row));
    }
    return out;
}

Image transpose(const Image& img)
{
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(x, y, c);
    return out;
}

}  // namespace guardscan
