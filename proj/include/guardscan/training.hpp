#pragma once

#include "guardscan/geometry.hpp"
#include "guardscan/hog.hpp"
#include "guardscan/image.hpp"
#include "guardscan/svm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace guardscan {

struct AnnotatedImage {
    std::string name;
    Image image;
    std::vector<BoundingBox> posts;
};

/// How training windows are cut from annotated images.
struct MiningConfig {
    int negatives_per_image = 150;
    /// Windows displaced from each post far enough that they must not fire.
    int hard_negatives_per_post = 1;
    /// Extra positives per post, shifted by up to positive_jitter pixels on each axis.
    int jittered_positives_per_post = 2;
    int positive_jitter = 2;
    /// Negatives overlap every post by less than this IOU.
    double negative_max_iou = 0.35;
    std::uint64_t seed = 0;
};

struct WindowSamples {
    std::vector<Image> positives;
    std::vector<Image> negatives;
};

/// Grayscale crops of size window_w x window_h. Posts whose box differs from the window size
/// are re-centred on a window of the detector size.
WindowSamples mine_windows(const std::vector<AnnotatedImage>& images, int window_w, int window_h,
                           const MiningConfig& cfg);

/// HOG rows for positives (+1) followed by negatives (-1).
LabeledWindowSet hog_dataset(const WindowSamples& samples, const HogParams& params);

}  // namespace guardscan
