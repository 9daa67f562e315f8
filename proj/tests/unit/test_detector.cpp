#include "guardscan/detector.hpp"
#include "guardscan/log.hpp"
#include "guardscan/synthgen.hpp"
#include "guardscan/training.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace guardscan;

namespace {

// A model trained on a handful of default synthetic scenes, shared by the end-to-end cases.
const LinearSvmModel& reference_svm()
{
    static const LinearSvmModel model = [] {
        std::vector<AnnotatedImage> images;
        for (int i = 0; i < 6; ++i) {
            SynthConfig cfg;
            cfg.seed = 100 + static_cast<std::uint64_t>(i);
            SynthScene s = render_facade(cfg);
            images.push_back({"s" + std::to_string(i), std::move(s.image), s.post_annotations});
        }
        const WindowSamples samples = mine_windows(images, 24, 72, MiningConfig{});
        const HogParams hog;
        LinearSvmModel m = train_linear_svm(hog_dataset(samples, hog), SvmTrainConfig{});
        m.hog = hog;
        m.window_w = 24;
        m.window_h = 72;
        return m;
    }();
    return model;
}

}  // namespace

TEST_CASE("keyframes follow the skip-and-stride rule")
{
    const auto k = keyframe_indices(1000, 10, 10, 100);
    CHECK(k == std::vector<long long>{100, 200, 300, 400, 500, 600, 700, 800});

    const auto clip = keyframe_indices(328 * 24, 24, 20, 100);
    REQUIRE(clip.size() == 70);
    CHECK(clip.front() == 480);
    CHECK(clip.back() == 7380);
    for (std::size_t i = 1; i < clip.size(); ++i) CHECK(clip[i] - clip[i - 1] == 100);

    CHECK(keyframe_indices(1000, 10, 10, 5000) == std::vector<long long>{100});
    CHECK(keyframe_indices(1000, 10, 10.05, 100).front() == 101);

    CHECK_THROWS_AS(keyframe_indices(100, 10, 5, 10), std::invalid_argument);
    CHECK_THROWS_AS(keyframe_indices(0, 10, 1, 10), std::invalid_argument);
    CHECK_THROWS_AS(keyframe_indices(1000, 10, 1, 0), std::invalid_argument);
}

TEST_CASE("sliding windows enumerate row-major from the origin")
{
    ScanParams p;
    p.window_w = 10;
    p.window_h = 10;
    p.stride_x = 5;
    p.stride_y = 5;

    const auto one = sliding_windows(Image(10, 10, 1), p);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == BoundingBox{0, 0, 10, 10});

    const auto row = sliding_windows(Image(20, 10, 1), p);
    CHECK(row == std::vector<BoundingBox>{{0, 0, 10, 10}, {5, 0, 10, 10}, {10, 0, 10, 10}});

    const std::size_t warnings = log::warning_count();
    CHECK(sliding_windows(Image(9, 9, 1), p).empty());
    CHECK(log::warning_count() == warnings + 1);
}

TEST_CASE("window count matches the closed form")
{
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        ScanParams p;
        p.window_w = static_cast<int>(rng.between(1, 30));
        p.window_h = static_cast<int>(rng.between(1, 30));
        p.stride_x = static_cast<int>(rng.between(1, 9));
        p.stride_y = static_cast<int>(rng.between(1, 9));
        const int W = static_cast<int>(rng.between(p.window_w, 80));
        const int H = static_cast<int>(rng.between(p.window_h, 80));
        const auto boxes = sliding_windows(Image(W, H, 1), p);
        const std::size_t expected = static_cast<std::size_t>((W - p.window_w) / p.stride_x + 1) *
                                     static_cast<std::size_t>((H - p.window_h) / p.stride_y + 1);
        REQUIRE(boxes.size() == expected);
        for (std::size_t i = 1; i < boxes.size(); ++i) {
            const bool next_in_row = boxes[i].y == boxes[i - 1].y && boxes[i].x == boxes[i - 1].x + p.stride_x;
            const bool next_row = boxes[i].x == 0 && boxes[i].y == boxes[i - 1].y + p.stride_y;
            CHECK((next_in_row || next_row));
        }
        for (const BoundingBox& b : boxes) CHECK((b.x + b.w <= W && b.y + b.h <= H));
    }
}

TEST_CASE("scan parameters are validated")
{
    ScanParams p;
    p.stride_x = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ScanParams{};
    p.nms_iou = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.nms_iou = 1.0;
    CHECK_NOTHROW(p.validate());

    LinearSvmModel wrong = reference_svm();
    wrong.window_w = 32;
    CHECK_THROWS_AS(detect(Image(200, 200, 1, 0.5), wrong, ScanParams{}), std::invalid_argument);
}

TEST_CASE("detector output on synthetic facades")
{
    const WindowClassifier model = reference_svm();
    const ScanParams p;

    SUBCASE("a blank image yields nothing")
    {
        CHECK(detect(Image(320, 240, 1, 0.75), model, p).empty());
    }

    SynthConfig cfg;
    cfg.seed = 7;
    cfg.missing_prob = 0.0;
    cfg.floor_ys = {120};
    cfg.image_h = 200;
    const SynthScene scene = render_facade(cfg);
    REQUIRE(scene.post_annotations.size() == 12);

    SUBCASE("most rendered posts are found")
    {
        const auto dets = detect(scene.image, model, p);
        int hit = 0;
        for (const BoundingBox& gt : scene.post_annotations)
            hit += std::any_of(dets.begin(), dets.end(), [&](const Detection& d) { return iou(d.box, gt) >= 0.5; });
        CHECK(hit >= 10);
    }

    SUBCASE("output is NMS-consistent and pure")
    {
        const auto dets = detect(scene.image, model, p);
        for (std::size_t i = 0; i < dets.size(); ++i)
            for (std::size_t j = i + 1; j < dets.size(); ++j) CHECK(iou(dets[i].box, dets[j].box) < p.nms_iou);
        for (const Detection& d : dets) CHECK(d.score >= p.score_threshold);
        CHECK(std::is_sorted(dets.begin(), dets.end(), detection_order));
        CHECK(detect(scene.image, model, p) == dets);
    }

    SUBCASE("row-band parallel scans agree with the serial scan")
    {
        CHECK(score_windows(scene.image, model, p, 4) == score_windows(scene.image, model, p, 1));
        CHECK(detect(scene.image, model, p, 4) == detect(scene.image, model, p, 1));
        CHECK(detect(scene.image, model, p, 64) == detect(scene.image, model, p, 1));
    }

    SUBCASE("raising the threshold never adds windows before suppression")
    {
        const auto all = score_windows(scene.image, model, p);
        CHECK(all.size() == sliding_windows(scene.image, p).size());
        auto kept = [&](double t) {
            std::vector<BoundingBox> out;
            for (const Detection& d : all)
                if (d.score >= t) out.push_back(d.box);
            return out;
        };
        std::vector<BoundingBox> prev = kept(-2.0);
        for (double t = -1.5; t <= 2.0; t += 0.5) {
            const auto cur = kept(t);
            CHECK(cur.size() <= prev.size());
            for (const BoundingBox& b : cur) CHECK(std::find(prev.begin(), prev.end(), b) != prev.end());
            prev = cur;
        }
    }
}
