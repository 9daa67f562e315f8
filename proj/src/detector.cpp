#include "guardscan/detector.hpp"

#include "guardscan/log.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace guardscan {

void ScanParams::validate() const
{
    if (window_w <= 0 || window_h <= 0) throw std::invalid_argument("scan: window size must be positive");
    if (stride_x <= 0 || stride_y <= 0) throw std::invalid_argument("scan: strides must be positive");
    if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw std::invalid_argument("scan: nms_iou must lie in (0, 1]");
    if (!std::isfinite(score_threshold)) throw std::invalid_argument("scan: score_threshold must be finite");
}

std::vector<long long> keyframe_indices(long long total_frames, double fps, double skip_seconds, long long stride)
{
    if (total_frames <= 0 || !(fps > 0.0) || !(skip_seconds >= 0.0) || stride <= 0)
        throw std::invalid_argument("keyframes: frames, fps and stride must be positive, skip non-negative");
    const auto skip = static_cast<long long>(std::ceil(skip_seconds * fps - 1e-9));
    const long long first = skip;
    const long long last = total_frames - 1 - skip;
    if (last < first) throw std::invalid_argument("keyframes: skip window leaves no usable frames");
    std::vector<long long> out;
    for (long long f = first; f <= last; f += stride) out.push_back(f);
    return out;
}

std::vector<BoundingBox> sliding_windows(const Image& img, const ScanParams& p)
{
    p.validate();
    std::vector<BoundingBox> out;
    if (p.window_w > img.width || p.window_h > img.height) {
        log::warn("sliding_windows: {}x{} window does not fit a {}x{} image", p.window_w, p.window_h, img.width,
                  img.height);
        return out;
    }
    for (int y = 0; y + p.window_h <= img.height; y += p.stride_y)
        for (int x = 0; x + p.window_w <= img.width; x += p.stride_x) out.push_back({x, y, p.window_w, p.window_h});
    return out;
}

namespace {

void check_compatible(const WindowClassifier& model, const ScanParams& p)
{
    std::visit(
        [&](const auto& m) {
            if (m.window_w != p.window_w || m.window_h != p.window_h)
                throw std::invalid_argument("detect: model window " + std::to_string(m.window_w) + "x" +
                                            std::to_string(m.window_h) + " differs from scan window " +
                                            std::to_string(p.window_w) + "x" + std::to_string(p.window_h));
        },
        model);
    if (const auto* svm = std::get_if<LinearSvmModel>(&model)) {
        if (hog_length(p.window_w, p.window_h, svm->hog) != svm->feature_dim)
            throw std::invalid_argument("detect: SVM feature dimension does not match its HOG parameters");
    } else {
        validate_cascade(std::get<CascadeModel>(model));
    }
}

void scan_band(const WindowGradientCache& cache, const WindowClassifier& model,
               const std::vector<BoundingBox>& boxes, std::size_t begin, std::size_t end, std::vector<Detection>& out)
{
    WindowPolar polar;
    for (std::size_t i = begin; i < end; ++i) {
        const BoundingBox& b = boxes[i];
        cache.window_polar(b.x, b.y, b.w, b.h, polar);
        if (const auto* svm = std::get_if<LinearSvmModel>(&model)) {
            out.push_back({b, svm_score(*svm, hog_from_polar(polar, svm->hog))});
        } else {
            const CascadeResult r = cascade_classify(std::get<CascadeModel>(model), polar);
            if (r.accepted) out.push_back({b, r.margin});
        }
    }
}

}  // namespace

std::vector<Detection> score_windows(const Image& img, const WindowClassifier& model, const ScanParams& p, int jobs)
{
    p.validate();
    check_compatible(model, p);
    const std::vector<BoundingBox> boxes = sliding_windows(img, p);
    if (boxes.empty()) return {};
    const Image gray = to_grayscale(img);
    const WindowGradientCache cache(gray);

    const std::size_t bands = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
    std::vector<std::vector<Detection>> parts(bands);
    const std::size_t per = (boxes.size() + bands - 1) / bands;
    if (bands == 1) {
        scan_band(cache, model, boxes, 0, boxes.size(), parts[0]);
    } else {
        std::vector<std::thread> workers;
        for (std::size_t b = 0; b < bands; ++b) {
            const std::size_t begin = std::min(boxes.size(), b * per);
            const std::size_t end = std::min(boxes.size(), begin + per);
            workers.emplace_back(
                [&, b, begin, end] { scan_band(cache, model, boxes, begin, end, parts[b]); });
        }
        for (auto& t : workers) t.join();
    }
    std::vector<Detection> all;
    for (auto& part : parts) all.insert(all.end(), part.begin(), part.end());
    return all;
}

std::vector<Detection> detect(const Image& img, const WindowClassifier& model, const ScanParams& p, int jobs)
{
    std::vector<Detection> scored = score_windows(img, model, p, jobs);
    std::erase_if(scored, [&](const Detection& d) { return d.score < p.score_threshold; });
    return nms(std::move(scored), p.nms_iou);
}

}  // namespace guardscan
