#include "guardscan/hog.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace guardscan {

void check_hog_geometry(int window_w, int window_h, const HogParams& p)
{
    if (p.cell_size <= 0 || p.block_size <= 0 || p.block_stride <= 0 || p.bins <= 0)
        throw std::invalid_argument("hog: cell, block, stride and bins must be positive");
    if (!(p.epsilon >= 0.0)) throw std::invalid_argument("hog: epsilon must be non-negative");
    if (window_w <= 0 || window_h <= 0 || window_w % p.cell_size != 0 || window_h % p.cell_size != 0)
        throw std::invalid_argument("hog: window " + std::to_string(window_w) + "x" +
                                    std::to_string(window_h) + " is not divisible by cell size " +
                                    std::to_string(p.cell_size));
    if (p.block_size > window_w / p.cell_size || p.block_size > window_h / p.cell_size)
        throw std::invalid_argument("hog: block larger than the window's cell grid");
}

std::size_t hog_length(int window_w, int window_h, const HogParams& p)
{
    check_hog_geometry(window_w, window_h, p);
    const int cells_x = window_w / p.cell_size;
    const int cells_y = window_h / p.cell_size;
    const std::size_t blocks_x = static_cast<std::size_t>((cells_x - p.block_size) / p.block_stride + 1);
    const std::size_t blocks_y = static_cast<std::size_t>((cells_y - p.block_size) / p.block_stride + 1);
    return blocks_x * blocks_y * static_cast<std::size_t>(p.block_size * p.block_size * p.bins);
}

HogDescriptor hog_from_polar(const WindowPolar& polar, const HogParams& p)
{
    const std::size_t length = hog_length(polar.width, polar.height, p);
    const int cells_x = polar.width / p.cell_size;
    const int cells_y = polar.height / p.cell_size;
    const double bin_width = 180.0 / p.bins;

    std::vector<double> cells(static_cast<std::size_t>(cells_x) * cells_y * p.bins, 0.0);
    for (int y = 0; y < polar.height; ++y) {
        const std::size_t cell_row = static_cast<std::size_t>(y / p.cell_size) * cells_x;
        for (int x = 0; x < polar.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * polar.width + x;
            const double mag = polar.magnitude[i];
            if (mag == 0.0) continue;
            const double pos = polar.orientation[i] / bin_width - 0.5;
            int b0 = static_cast<int>(std::floor(pos));
            const double frac = pos - b0;
            if (b0 < 0) b0 += p.bins;
            const int b1 = (b0 + 1) % p.bins;
            double* hist = &cells[(cell_row + x / p.cell_size) * p.bins];
            hist[b0] += mag * (1.0 - frac);
            hist[b1] += mag * frac;
        }
    }

    HogDescriptor out;
    out.values.reserve(length);
    const int blocks_x = (cells_x - p.block_size) / p.block_stride + 1;
    const int blocks_y = (cells_y - p.block_size) / p.block_stride + 1;
    const double eps2 = p.epsilon * p.epsilon;
    for (int by = 0; by < blocks_y; ++by) {
        for (int bx = 0; bx < blocks_x; ++bx) {
            const std::size_t start = out.values.size();
            for (int j = 0; j < p.block_size; ++j) {
                for (int i = 0; i < p.block_size; ++i) {
                    const std::size_t cell =
                        static_cast<std::size_t>(by * p.block_stride + j) * cells_x + bx * p.block_stride + i;
                    out.values.insert(out.values.end(), cells.begin() + static_cast<std::ptrdiff_t>(cell * p.bins),
                                      cells.begin() + static_cast<std::ptrdiff_t>((cell + 1) * p.bins));
                }
            }
            double sq = 0.0;
            for (std::size_t k = start; k < out.values.size(); ++k) sq += out.values[k] * out.values[k];
            const double norm = std::sqrt(sq + eps2);
            if (norm > 0.0) {
                for (std::size_t k = start; k < out.values.size(); ++k) out.values[k] /= norm;
            }
        }
    }
    return out;
}

HogDescriptor compute_hog(const Image& window, const HogParams& params)
{
    if (window.channels != 1) throw std::invalid_argument("compute_hog: expected a single-channel window");
    check_hog_geometry(window.width, window.height, params);
    const GradientField g = gradient(window);
    WindowPolar polar{window.width, window.height, g.magnitude, g.orientation};
    return hog_from_polar(polar, params);
}

WindowGradientCache::WindowGradientCache(const Image& gray) : image_(gray), field_(gradient(gray)) {}

void WindowGradientCache::window_polar(int x0, int y0, int w, int h, WindowPolar& out) const
{
    if (x0 < 0 || y0 < 0 || w < 3 || h < 3 || x0 + w > image_.width || y0 + h > image_.height)
        throw std::invalid_argument("window_polar: window outside image");
    out.width = w;
    out.height = h;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    out.magnitude.resize(n);
    out.orientation.resize(n);
    for (int j = 0; j < h; ++j) {
        const int y = y0 + j;
        const bool row_interior = j > 0 && j < h - 1;
        for (int i = 0; i < w; ++i) {
            const int x = x0 + i;
            const std::size_t o = static_cast<std::size_t>(j) * w + i;
            if (row_interior && i > 0 && i < w - 1) {
                const std::size_t s = field_.index(x, y);
                out.magnitude[o] = field_.magnitude[s];
                out.orientation[o] = field_.orientation[s];
                continue;
            }
            double dx;
            if (i == 0)
                dx = image_.at(x + 1, y) - image_.at(x, y);
            else if (i == w - 1)
                dx = image_.at(x, y) - image_.at(x - 1, y);
            else
                dx = image_.at(x + 1, y) - image_.at(x - 1, y);
            double dy;
            if (j == 0)
                dy = image_.at(x, y + 1) - image_.at(x, y);
            else if (j == h - 1)
                dy = image_.at(x, y) - image_.at(x, y - 1);
            else
                dy = image_.at(x, y + 1) - image_.at(x, y - 1);
            out.magnitude[o] = std::sqrt(dx * dx + dy * dy);
            out.orientation[o] = unsigned_orientation(dx, dy);
        }
    }
}

}  // namespace guardscan
