#pragma once

#include <string>

#include "spac/image.hpp"

namespace spac {

// BT.601 full-range luma/chroma split. All samples in [0,1].
struct Ycbcr {
    double y, cb, cr;
};
struct Rgb {
    double r, g, b;
};

Ycbcr rgb_to_ycbcr(double r, double g, double b);
Rgb ycbcr_to_rgb(double y, double cb, double cr);

// Expands a printf-style pattern with exactly one integer conversion
// (e.g. "frame_%04d.png"). Throws if the pattern is malformed.
std::string expand_pattern(const std::string& pattern, int index);

// 8- or 16-bit PNG in, converted to YCbCr doubles. Palette/gray/alpha
// variants are normalized to RGB first.
Frame load_frame(const std::string& path);
void save_frame(const Frame& frame, const std::string& path);

// Binary masks as 8-bit gray PNG (0/255 on write, >=128 is set on read).
Mask load_mask(const std::string& path);
void save_mask(const Mask& mask, const std::string& path);

// Nonnegative real maps as 16-bit gray PNG, values clamped to [0,1].
Plane load_gray16(const std::string& path);
void save_gray16(const Plane& plane, const std::string& path);

// Frames pattern expanded over [first, last], inclusive.
FrameSequence load_sequence(const std::string& pattern, int first, int last);
void save_sequence(const FrameSequence& seq, const std::string& pattern, int first);

}  // namespace spac
