#pragma once

#include "guardscan/geometry.hpp"

#include <string>
#include <utility>
#include <vector>

namespace guardscan {

struct MatchResult {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    /// (detection index, ground-truth index) in input numbering.
    std::vector<std::pair<int, int>> pairs;
};

/// Greedy one-to-one matching in detection_order. Each detection takes the unmatched
/// ground-truth box of highest IOU >= iou_threshold; ties go to the lexicographically
/// smaller box, so ground-truth order does not matter.
MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<BoundingBox>& gt,
                             double iou_threshold = 0.5);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

/// tp / (tp + fp) and tp / (tp + fn). Empty denominators: precision is 1 if fn == 0 else 0;
/// recall is 1.
PrecisionRecall precision_recall(int tp, int fp, int fn);

struct ImageCounts {
    std::string image;
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

struct EvalReport {
    std::string label;
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    std::vector<ImageCounts> per_image;
};

/// Micro-average: sums per-image counts and recomputes precision and recall.
EvalReport aggregate(std::string label, std::vector<ImageCounts> per_image);

std::string report_csv(const std::vector<EvalReport>& rows);
std::string report_table(const std::vector<EvalReport>& rows);

}  // namespace guardscan
