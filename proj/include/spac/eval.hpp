#pragma once

#include <vector>

#include "spac/image.hpp"

namespace spac {

// 10·log10(1/MSE), capped at 99 dB (identical inputs would be infinite).
double psnr(const Plane& a, const Plane& b);

// Mean local SSIM, 11×11 Gaussian window sigma=1.5, K1=0.01, K2=0.03,
// dynamic range 1, valid-window region only.
double ssim(const Plane& a, const Plane& b);

// Central crop dropping `margin` pixels on every side.
Plane crop_border(const Plane& p, int margin);

struct PrPoint {
    double threshold, precision, recall;
};

struct PrCurve {
    std::vector<PrPoint> points;  // thresholds strictly increasing
    double f_measure = 0.0;       // max over points of 2PR/(P+R)
};

// Rain-streak-edge PR: threshold the residual |derained − clean| at each τ
// and score the resulting detection map against the ground-truth rain mask.
// Precision of an empty detection map is 1 by convention.
PrCurve rain_edge_pr(const Plane& derained, const Plane& clean_gt, const Mask& rain_mask_gt,
                     const std::vector<double>& thresholds);

double f_measure(const PrCurve& curve);

// Pooled PR over a sequence: detection/hit counts are summed across frames
// before the ratios are taken.
PrCurve rain_edge_pr_sequence(const std::vector<Plane>& derained,
                              const std::vector<Plane>& clean_gt, const std::vector<Mask>& gt,
                              const std::vector<double>& thresholds);

// PSNR restricted to mask pixels (patch-level scoring).
double masked_psnr(const Plane& a, const Plane& b, const Mask& m);

// Default threshold sweep for PR evaluation: 0.005..0.25 in even steps.
std::vector<double> default_pr_thresholds(int count = 50);

}  // namespace spac
