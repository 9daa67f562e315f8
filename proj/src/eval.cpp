#include "guardscan/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace guardscan {

MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<BoundingBox>& gt,
                             double iou_threshold)
{
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw std::invalid_argument("match_detections: threshold must lie in (0, 1]");
    std::vector<int> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return detection_order(dets[a], dets[b]); });

    auto key = [](const BoundingBox& b) { return std::tie(b.x, b.y, b.w, b.h); };
    std::vector<bool> used(gt.size(), false);
    MatchResult r;
    for (int d : order) {
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t g = 0; g < gt.size(); ++g) {
            if (used[g]) continue;
            const double v = iou(dets[d].box, gt[g]);
            if (v < iou_threshold) continue;
            if (best < 0 || v > best_iou || (v == best_iou && key(gt[g]) < key(gt[best]))) {
                best = static_cast<int>(g);
                best_iou = v;
            }
        }
        if (best < 0) {
            ++r.fp;
        } else {
            used[best] = true;
            ++r.tp;
            r.pairs.emplace_back(d, best);
        }
    }
    r.fn = static_cast<int>(gt.size()) - r.tp;
    return r;
}

PrecisionRecall precision_recall(int tp, int fp, int fn)
{
    if (tp < 0 || fp < 0 || fn < 0) throw std::invalid_argument("precision_recall: negative count");
    PrecisionRecall pr;
    pr.precision = tp + fp == 0 ? (fn == 0 ? 1.0 : 0.0) : static_cast<double>(tp) / (tp + fp);
    pr.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / (tp + fn);
    return pr;
}

EvalReport aggregate(std::string label, std::vector<ImageCounts> per_image)
{
    EvalReport r;
    r.label = std::move(label);
    for (const ImageCounts& c : per_image) {
        r.tp += c.tp;
        r.fp += c.fp;
        r.fn += c.fn;
    }
    const PrecisionRecall pr = precision_recall(r.tp, r.fp, r.fn);
    r.precision = pr.precision;
    r.recall = pr.recall;
    r.per_image = std::move(per_image);
    return r;
}

std::string report_csv(const std::vector<EvalReport>& rows)
{
    std::string out = "config,precision,recall,tp,fp,fn\n";
    for (const EvalReport& r : rows)
        out += fmt::format("{},{:.4f},{:.4f},{},{},{}\n", r.label, r.precision, r.recall, r.tp, r.fp, r.fn);
    return out;
}

std::string report_table(const std::vector<EvalReport>& rows)
{
    std::size_t width = std::string("Metric").size();
    for (const EvalReport& r : rows) width = std::max(width, r.label.size());
    std::string out = fmt::format("{:<{}}  {:>9}  {:>9}  {:>6}  {:>6}  {:>6}\n", "Metric", width, "Precision",
                                  "Recall", "TP", "FP", "FN");
    for (const EvalReport& r : rows)
        out += fmt::format("{:<{}}  {:>9.4f}  {:>9.4f}  {:>6}  {:>6}  {:>6}\n", r.label, width, r.precision,
                           r.recall, r.tp, r.fp, r.fn);
    return out;
}

}  // namespace guardscan
