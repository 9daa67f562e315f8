#pragma once

#include "guardscan/image.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace guardscan {

struct HogParams {
    int cell_size = 8;     // pixels
    int block_size = 2;    // cells
    int block_stride = 1;  // cells
    int bins = 9;          // unsigned orientations over [0, 180)
    double epsilon = 1e-6;

    bool operator==(const HogParams&) const = default;
};

struct HogDescriptor {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

/// Throws std::invalid_argument unless the window tiles into cells and blocks fit.
void check_hog_geometry(int window_w, int window_h, const HogParams& params);

/// blocks_x * blocks_y * block_size^2 * bins.
std::size_t hog_length(int window_w, int window_h, const HogParams& params);

/// Magnitude-weighted votes into the two nearest orientation bins, cell histograms, then
/// per-block L2 normalisation v / sqrt(|v|^2 + eps^2).
HogDescriptor compute_hog(const Image& window, const HogParams& params);

/// Per-pixel gradient magnitude and orientation of one window, as compute_hog sees it.
struct WindowPolar {
    int width = 0;
    int height = 0;
    std::vector<double> magnitude;
    std::vector<double> orientation;
};

HogDescriptor hog_from_polar(const WindowPolar& polar, const HogParams& params);

/// Dense-scan helper. Precomputes the gradient of a whole grayscale image once and serves
/// the polar field of any window bit-identically to gradient(crop(...)): interior pixels of
/// a window reuse the image-wide centred differences, the window border ring is recomputed
/// with one-sided differences.
class WindowGradientCache {
public:
    explicit WindowGradientCache(const Image& gray);

    /// Fills `out` for the w x h window at (x, y); reuses its storage.
    void window_polar(int x, int y, int w, int h, WindowPolar& out) const;

    int width() const { return image_.width; }
    int height() const { return image_.height; }

private:
    const Image& image_;
    GradientField field_;
};

}  // namespace guardscan
