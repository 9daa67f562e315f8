#include "guardscan/training.hpp"

#include "guardscan/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace guardscan {
namespace {

double max_iou(const BoundingBox& b, const std::vector<BoundingBox>& posts)
{
    double best = 0.0;
    for (const BoundingBox& p : posts) best = std::max(best, iou(b, p));
    return best;
}

bool inside(const BoundingBox& b, const Image& img)
{
    return b.x >= 0 && b.y >= 0 && b.x + b.w <= img.width && b.y + b.h <= img.height;
}

}  // namespace

WindowSamples mine_windows(const std::vector<AnnotatedImage>& images, int window_w, int window_h,
                           const MiningConfig& cfg)
{
    if (window_w <= 0 || window_h <= 0) throw std::invalid_argument("mine_windows: window size must be positive");
    WindowSamples out;
    Rng rng(cfg.seed);
    for (const AnnotatedImage& ai : images) {
        const Image gray = to_grayscale(ai.image);
        auto take = [&](const BoundingBox& b, std::vector<Image>& dst) {
            dst.push_back(crop(gray, b.x, b.y, b.w, b.h));
        };

        for (const BoundingBox& post : ai.posts) {
            const BoundingBox centred{static_cast<int>(std::lround(post.center_x() - window_w / 2.0)),
                                      static_cast<int>(std::lround(post.center_y() - window_h / 2.0)), window_w,
                                      window_h};
            if (inside(centred, gray)) take(centred, out.positives);
            for (int k = 0; k < cfg.jittered_positives_per_post; ++k) {
                BoundingBox j = centred;
                j.x += static_cast<int>(rng.between(-cfg.positive_jitter, cfg.positive_jitter));
                j.y += static_cast<int>(rng.between(-cfg.positive_jitter, cfg.positive_jitter));
                if (inside(j, gray)) take(j, out.positives);
            }
            for (int k = 0; k < cfg.hard_negatives_per_post; ++k) {
                for (int attempt = 0; attempt < 10; ++attempt) {
                    BoundingBox n = centred;
                    const int sign = rng.bernoulli(0.5) ? 1 : -1;
                    if (rng.bernoulli(0.5))
                        n.x += sign * static_cast<int>(rng.between(window_w / 2, window_w * 5 / 6));
                    else
                        n.y += sign * static_cast<int>(rng.between(window_h / 2, window_h * 7 / 9));
                    if (inside(n, gray) && max_iou(n, ai.posts) < cfg.negative_max_iou) {
                        take(n, out.negatives);
                        break;
                    }
                }
            }
        }

        if (gray.width < window_w || gray.height < window_h) continue;
        int taken = 0;
        for (int attempt = 0; attempt < cfg.negatives_per_image * 20 && taken < cfg.negatives_per_image; ++attempt) {
            const BoundingBox n{static_cast<int>(rng.between(0, gray.width - window_w)),
                                static_cast<int>(rng.between(0, gray.height - window_h)), window_w, window_h};
            if (max_iou(n, ai.posts) >= cfg.negative_max_iou) continue;
            take(n, out.negatives);
            ++taken;
        }
    }
    return out;
}

LabeledWindowSet hog_dataset(const WindowSamples& samples, const HogParams& params)
{
    LabeledWindowSet set;
    for (const Image& w : samples.positives) set.add(compute_hog(w, params).values, 1);
    for (const Image& w : samples.negatives) set.add(compute_hog(w, params).values, -1);
    return set;
}

}  // namespace guardscan
