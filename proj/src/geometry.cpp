#include "guardscan/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace guardscan {

long long intersection_area(const BoundingBox& a, const BoundingBox& b)
{
    const long long ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const long long iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    return ix * iy;
}

double iou(const BoundingBox& a, const BoundingBox& b)
{
    const long long inter = intersection_area(a, b);
    if (inter == 0) return 0.0;
    const long long uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

bool detection_order(const Detection& a, const Detection& b)
{
    if (a.score != b.score) return a.score > b.score;
    if (a.box.x != b.box.x) return a.box.x < b.box.x;
    if (a.box.y != b.box.y) return a.box.y < b.box.y;
    if (a.box.w != b.box.w) return a.box.w < b.box.w;
    return a.box.h < b.box.h;
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold)
{
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw std::invalid_argument("nms: threshold must lie in (0, 1]");
    std::stable_sort(dets.begin(), dets.end(), detection_order);
    std::vector<Detection> kept;
    std::vector<bool> dropped(dets.size(), false);
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dropped[i]) continue;
        kept.push_back(dets[i]);
        for (std::size_t j = i + 1; j < dets.size(); ++j) {
            if (!dropped[j] && iou(dets[i].box, dets[j].box) >= iou_threshold) dropped[j] = true;
        }
    }
    return kept;
}

}  // namespace guardscan
