#pragma once

#include <cstdint>
#include <vector>

#include "spac/image.hpp"

namespace spac {

// Procedural test scenes: a sum of oriented cosine gratings evaluated at
// world coordinates (x + vx·t, y + vy·t).  Camera translation is analytic,
// so sub-pixel motion introduces no resampling blur and a static scene
// renders bit-identically every frame.
struct SceneParams {
    int width = 240, height = 180, frames = 50;
    double vx = 0.0, vy = 0.0;  // camera velocity, px/frame
    int harmonics = 6;
    double base = 0.5;   // mean luma
    double amp = 0.35;   // total luma contrast (sum of harmonic amplitudes)
    double min_wavelength = 14.0, max_wavelength = 96.0;
    double chroma_amp = 0.08;       // smooth Cb/Cr modulation
    double chroma_wavelength = 400.0;
    std::uint64_t seed = 0;

    void validate() const;
};

Frame render_scene_frame(const SceneParams& params, int frame_index);
FrameSequence render_scene(const SceneParams& params);

// Luma value at continuous world coordinates (for analytic checks).
double scene_luma_at(const SceneParams& params, double world_x, double world_y);

}  // namespace spac
