#pragma once

#include <vector>

namespace guardscan {

/// Axis-aligned pixel box; covers columns [x, x + w) and rows [y, y + h).
struct BoundingBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    long long area() const { return static_cast<long long>(w) * h; }
    double center_x() const { return x + w / 2.0; }
    double center_y() const { return y + h / 2.0; }
    /// y coordinate of the bottom edge.
    int bottom() const { return y + h; }
    bool valid() const { return w > 0 && h > 0; }

    bool operator==(const BoundingBox&) const = default;
};

struct Detection {
    BoundingBox box;
    double score = 0.0;

    bool operator==(const Detection&) const = default;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

long long intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Score-descending order with ties broken by smaller x, then smaller y.
bool detection_order(const Detection& a, const Detection& b);

/// Greedy non-maximum suppression. Keeps the best remaining detection and drops every
/// remaining one with IOU >= iou_threshold against it. Output is in detection_order.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold);

}  // namespace guardscan
