#pragma once

#include <vector>

#include "spac/alignment.hpp"
#include "spac/cnn.hpp"
#include "spac/image.hpp"
#include "spac/superpixel.hpp"

// Serial brute-force reference implementations. These exist to pin the
// production kernels in tests and benchmarks: they read straight from the
// frames with plain triple loops, no search buffer, no OpenMP.
namespace spac::ref {

// Masked SSD of the template against the frame at absolute position
// (row0, col0), summed in the same row-major order the production kernel
// uses so valid offsets compare bit-exactly.
double masked_ssd_frame(const Plane& y, const Plane& tpl, const Mask& mask, int row0, int col0);

bool offset_in_frame(const Plane& y, int n_x, int row0, int col0);

// Exhaustive best offset for one frame over the n_s-wide search square.
MatchEntry best_match(const Plane& y, int t, const SpPatch& patch, const Mask& mask, int n_s);

// Exhaustive ranked candidate list over the whole window (the T1 pool),
// ascending by cost with the production tie order.
std::vector<MatchEntry> ranked_matches(const Window& window, const SpPatch& patch,
                                       const Mask& m_rsp, int n_s, int n_st,
                                       bool exclude_current_frame);

// Direct six-loop convolution with zero padding.
Tensor3 conv_naive(const ConvLayer& layer, const Tensor3& in);

// PSNR with compensated accumulation.
double psnr_kahan(const Plane& a, const Plane& b);

// SSIM via separable Gaussian filtering of the moment maps.
double ssim_filtered(const Plane& a, const Plane& b);

}  // namespace spac::ref
