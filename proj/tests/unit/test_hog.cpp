#include "guardscan/hog.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace guardscan;

namespace {

std::size_t expected_length(int w, int h, const HogParams& p)
{
    const int cx = w / p.cell_size, cy = h / p.cell_size;
    const int bx = (cx - p.block_size) / p.block_stride + 1;
    const int by = (cy - p.block_size) / p.block_stride + 1;
    return static_cast<std::size_t>(bx) * by * p.block_size * p.block_size * p.bins;
}

// Per-bin energy summed over every cell slot of the descriptor.
std::vector<double> bin_energy(const HogDescriptor& d, int bins)
{
    std::vector<double> e(static_cast<std::size_t>(bins), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) e[i % bins] += d.values[i];
    return e;
}

}  // namespace

TEST_CASE("constant window gives a zero descriptor")
{
    const HogDescriptor d = compute_hog(Image(24, 72, 1, 0.6), HogParams{});
    CHECK(d.size() == hog_length(24, 72, HogParams{}));
    for (double v : d.values) CHECK(v == 0.0);
}

TEST_CASE("descriptor length examples")
{
    CHECK(hog_length(64, 64, HogParams{}) == 1764);
    CHECK(hog_length(16, 16, HogParams{}) == 36);
    CHECK(hog_length(24, 24, HogParams{24, 1, 1, 9, 1e-6}) == 9);
    Rng rng(5);
    CHECK(compute_hog(testing::random_texture(64, 64, rng), HogParams{}).size() == 1764);
    CHECK_THROWS_AS(hog_length(30, 64, HogParams{}), std::invalid_argument);
    CHECK_THROWS_AS(hog_length(8, 8, HogParams{}), std::invalid_argument);
    CHECK_THROWS_AS(compute_hog(Image(30, 64, 1, 0.5), HogParams{}), std::invalid_argument);
}

TEST_CASE("length formula matches compute_hog on random parameterisations")
{
    Rng rng(17);
    int checked = 0;
    while (checked < 100) {
        HogParams p;
        p.cell_size = 2 + static_cast<int>(rng.below(7));
        p.block_size = 1 + static_cast<int>(rng.below(3));
        p.block_stride = 1 + static_cast<int>(rng.below(2));
        p.bins = 2 + static_cast<int>(rng.below(12));
        const int cx = p.block_size + static_cast<int>(rng.below(6));
        const int cy = p.block_size + static_cast<int>(rng.below(6));
        const int w = cx * p.cell_size, h = cy * p.cell_size;
        if (w < 3 || h < 3) continue;
        const HogDescriptor d = compute_hog(testing::random_texture(w, h, rng), p);
        CHECK(d.size() == expected_length(w, h, p));
        CHECK(hog_length(w, h, p) == expected_length(w, h, p));
        for (double v : d.values) CHECK((v >= 0.0 && std::isfinite(v)));
        const std::size_t block_len = static_cast<std::size_t>(p.block_size * p.block_size * p.bins);
        for (std::size_t b = 0; b < d.size(); b += block_len) {
            double s = 0.0;
            for (std::size_t i = b; i < b + block_len; ++i) s += d.values[i] * d.values[i];
            CHECK(std::sqrt(s) <= 1.0 + 1e-6);
        }
        ++checked;
    }
}

TEST_CASE("without epsilon, intensity scaling leaves the descriptor unchanged")
{
    Rng rng(23);
    HogParams p;
    p.epsilon = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Image w = testing::random_texture(24, 72, rng);
        Image half = w;
        for (double& v : half.data) v *= 0.5;
        const HogDescriptor a = compute_hog(w, p), b = compute_hog(half, p);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-9);
    }
}

TEST_CASE("argmax is stable under intensity scaling")
{
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const Image w = testing::random_texture(24, 72, rng, 0.2, 0.45);
        const HogDescriptor base = compute_hog(w, HogParams{});
        const auto arg = std::max_element(base.values.begin(), base.values.end()) - base.values.begin();
        for (double k : {0.5, 2.0}) {
            Image s = w;
            for (double& v : s.data) v *= k;
            const HogDescriptor d = compute_hog(s, HogParams{});
            CHECK(std::max_element(d.values.begin(), d.values.end()) - d.values.begin() == arg);
        }
    }
}

TEST_CASE("rotating an edge by 90 degrees moves energy between the 0 and 90 degree bins")
{
    // Bin i is centred at (i + 0.5) * 20 degrees: 0 degrees splits between bins 0 and 8, 90 lands on bin 4.
    Image vertical_edge(32, 32, 1, 0.2);
    for (int y = 0; y < 32; ++y)
        for (int x = 16; x < 32; ++x) vertical_edge.at(x, y) = 0.8;
    const std::vector<double> e0 = bin_energy(compute_hog(vertical_edge, HogParams{}), 9);
    const std::vector<double> e90 = bin_energy(compute_hog(transpose(vertical_edge), HogParams{}), 9);
    CHECK(e0[0] == doctest::Approx(e0[8]));
    CHECK(e0[0] > 0.0);
    CHECK(e0[4] == 0.0);
    CHECK(e90[4] > 0.0);
    CHECK(e90[0] == 0.0);
    CHECK(e90[8] == 0.0);
    CHECK(std::max_element(e90.begin(), e90.end()) - e90.begin() == 4);
}

TEST_CASE("window cache matches gradient of the cropped window bit for bit")
{
    Rng rng(31);
    const Image img = testing::random_texture(97, 83, rng);
    const WindowGradientCache cache(img);
    WindowPolar polar;
    for (int trial = 0; trial < 40; ++trial) {
        const int w = 3 + static_cast<int>(rng.below(30)), h = 3 + static_cast<int>(rng.below(30));
        const int x = static_cast<int>(rng.below(97 - w + 1)), y = static_cast<int>(rng.below(83 - h + 1));
        cache.window_polar(x, y, w, h, polar);
        const GradientField g = gradient(crop(img, x, y, w, h));
        CHECK(polar.magnitude == g.magnitude);
        CHECK(polar.orientation == g.orientation);
    }
    const Image win = crop(img, 8, 4, 24, 72);
    cache.window_polar(8, 4, 24, 72, polar);
    CHECK(hog_from_polar(polar, HogParams{}).values == compute_hog(win, HogParams{}).values);
}
