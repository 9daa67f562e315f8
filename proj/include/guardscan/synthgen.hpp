#pragma once

#include "guardscan/floors.hpp"
#include "guardscan/geometry.hpp"
#include "guardscan/image.hpp"
#include "guardscan/spacing.hpp"

#include <cstdint>
#include <vector>

namespace guardscan {

/// Facade renderer settings. Posts are dark bars standing on floor slabs; the annotated box is
/// post_w x post_h with its bottom edge on the slab top and the bar centred in it.
struct SynthConfig {
    int image_w = 800;
    int image_h = 480;
    std::vector<int> floor_ys{120, 280, 440};  // slab top at x = 0
    int slab_thickness = 4;
    int posts_per_floor = 12;
    int post_w = 24;
    int post_h = 72;
    int bar_w = 6;
    int bar_top_margin = 12;
    int margin = 16;
    double base_spacing = 56.0;
    /// Spacing between neighbouring posts in units of base_spacing.
    GmmModel spacing_model{{GmmComponent{1.0, 1.0, 0.0025}}};
    double missing_prob = 0.15;
    double noise_sigma = 0.02;
    double tilt_deg = 0.0;
    double background = 0.75;
    double post_intensity = 0.25;
    double floor_intensity = 0.35;
    bool rail = false;
    /// Post-like bars floating on the wall between floors.
    int wall_clutter = 4;
    /// Post-like bars standing on a floor between two neighbouring posts, at most one per floor.
    int floor_clutter = 3;
    std::uint64_t seed = 7;

    /// Throws std::invalid_argument when the layout cannot hold the posts.
    void validate() const;
};

struct SynthScene {
    Image image;  // grayscale, quantised to 8-bit levels
    std::vector<BoundingBox> post_annotations;
    std::vector<FloorLine> true_floor_lines;
    std::vector<BoundingBox> removed_posts;
    /// Unannotated post-like bars (wall and floor clutter).
    std::vector<BoundingBox> distractors;
    /// Floor index of every annotation, parallel to post_annotations.
    std::vector<int> annotation_floor;
};

SynthScene render_facade(const SynthConfig& cfg);

}  // namespace guardscan
