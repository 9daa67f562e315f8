#pragma once

#include "guardscan/geometry.hpp"
#include "guardscan/image.hpp"
#include "guardscan/model_io.hpp"

#include <cstdint>
#include <vector>

namespace guardscan {

struct ScanParams {
    int window_w = 24;
    int window_h = 72;
    int stride_x = 2;
    int stride_y = 4;
    double score_threshold = 0.0;
    double nms_iou = 0.3;

    /// Throws std::invalid_argument on non-positive sizes or nms_iou outside (0, 1].
    void validate() const;
};

/// Frames start, start + stride, ... up to the last usable frame, where the first and last
/// ceil(skip_seconds * fps) frames are skipped.
std::vector<long long> keyframe_indices(long long total_frames, double fps, double skip_seconds,
                                        long long stride);

/// Row-major enumeration of every window fully inside the image, starting at (0, 0).
std::vector<BoundingBox> sliding_windows(const Image& img, const ScanParams& p);

/// Classifier score of every window, before thresholding and NMS. Exposed for tests of the
/// filtering contract; `jobs` splits the scan into row bands.
std::vector<Detection> score_windows(const Image& img, const WindowClassifier& model,
                                     const ScanParams& p, int jobs = 1);

/// Grayscale, per-window HOG, score >= threshold (cascade: accepted windows scored by their
/// final margin), then NMS over the whole image.
std::vector<Detection> detect(const Image& img, const WindowClassifier& model, const ScanParams& p,
                              int jobs = 1);

}  // namespace guardscan
