#pragma once

#include <cstdint>

#include "spac/image.hpp"

namespace spac {

// Parameterized streak renderer.  Rain is purely additive in luma: detection
// rests on rain raising intensity, and additive compositing keeps the ground
// truth exact.
struct RainParams {
    double density = 80.0;  // streaks per frame per megapixel
    double length_min = 12.0, length_max = 28.0;   // px
    double width_min = 1.2, width_max = 2.4;       // px, Gaussian profile: sigma = width/2
    double angle_mean_deg = 8.0;                   // from vertical
    double angle_jitter_deg = 4.0;                 // uniform +-jitter
    double opacity_min = 0.06, opacity_max = 0.24; // additive luma boost at the core
    int blur_samples = 1;      // supersamples per pixel axis (anti-aliasing quality)
    double fall_speed = 0.0;   // px/frame; >0 animates one streak set downward
    std::uint64_t seed = 0;
    double eps_gt = 0.005;     // gt_mask threshold on the boost

    void validate() const;
};

struct RainyFrame {
    Frame frame;     // y = clamp01(clean.y + gt_boost); chroma untouched
    Mask gt_mask;    // gt_boost >= eps_gt
    Plane gt_boost;  // added luma before clamping
};

// Deterministic in (params.seed, frame_index); streaks are independent across
// frames unless fall_speed > 0.
RainyFrame synthesize_rain(const Frame& clean, const RainParams& params, int frame_index);

}  // namespace spac
