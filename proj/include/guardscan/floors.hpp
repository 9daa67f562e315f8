#pragma once

#include "guardscan/geometry.hpp"
#include "guardscan/image.hpp"

#include <cstdint>
#include <vector>

namespace guardscan {

struct LineSegment {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
    double strength = 0.0;  // summed gradient magnitude of the supporting pixels

    double length() const;
    /// dy/dx; +-inf for vertical segments.
    double slope() const;
    double mid_x() const { return 0.5 * (x1 + x2); }
    double mid_y() const { return 0.5 * (y1 + y2); }
};

struct FloorLine {
    double slope = 0.0;
    double intercept = 0.0;  // y at x = 0
    double coverage = 0.0;   // length of the union of member x-intervals
    int support = 0;

    double y_at(double x) const { return slope * x + intercept; }
};

struct SegmentConfig {
    double grad_threshold = 0.15;
    double min_length = 20.0;
    double angle_tolerance_deg = 22.5;
};

struct VanishingConfig {
    int ransac_iters = 500;
    double inlier_angle_deg = 3.0;
    std::uint64_t seed = 0;
};

struct FloorConfig {
    SegmentConfig segments;
    VanishingConfig vanishing;
    double intercept_tolerance = 5.0;
    double slope_tolerance = 0.1;
    int k = 10;
    double max_dist = 10.0;
};

/// Thresholds the gradient magnitude, grows 8-connected regions of pixels whose unsigned
/// orientation stays within the tolerance of the region mean, and fits each region with a
/// magnitude-weighted principal axis. Regions shorter than min_length are dropped.
std::vector<LineSegment> detect_line_segments(const Image& img, const SegmentConfig& cfg);

/// A vanishing point is homogeneous; w == 0 means a direction at infinity.
struct VanishingPoint {
    double x = 0.0, y = 0.0, w = 0.0;
};

struct SegmentGroup {
    VanishingPoint vp;
    std::vector<int> members;  // indices into the input segment list
};

/// Greedy RANSAC extraction of parallel-line groups. Hypotheses are intersections of segment
/// pairs; all pairs are tried when there are at most ransac_iters of them. Groups come out in
/// descending size.
std::vector<SegmentGroup> group_by_vanishing_point(const std::vector<LineSegment>& segs,
                                                   const VanishingConfig& cfg);

/// Single-linkage clustering on intercept, measured along the group's median slope. Throws
/// std::invalid_argument naming the segment if a member is steeper than slope_tolerance.
std::vector<FloorLine> cluster_segments(const std::vector<LineSegment>& group,
                                        double intercept_tolerance, double slope_tolerance = 0.1);

/// Top k by coverage; ties by support, then by smaller intercept.
std::vector<FloorLine> select_floors(std::vector<FloorLine> lines, int k);

/// Segments -> largest near-horizontal vanishing group -> clusters -> top k.
std::vector<FloorLine> detect_floors(const Image& img, const FloorConfig& cfg);

/// Vertical distance from the bottom-edge midpoint of the box to the line.
double floor_distance(const BoundingBox& box, const FloorLine& line);

/// Index of the nearest floor, or -1 when there are none.
int nearest_floor(const BoundingBox& box, const std::vector<FloorLine>& floors);

/// Keeps detections whose bottom-edge midpoint lies within max_dist of some floor. With no
/// floors the input is returned unchanged and a warning is logged.
std::vector<Detection> filter_by_floor(const std::vector<Detection>& dets,
                                       const std::vector<FloorLine>& floors, double max_dist = 10.0);

}  // namespace guardscan
