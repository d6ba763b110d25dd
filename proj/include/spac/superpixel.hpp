#pragma once

#include <vector>

#include "spac/image.hpp"

namespace spac {

struct SlicParams {
    int target_count = 300;
    double compactness = 10.0;  // on CIELAB scaled to [0,100]
    int iterations = 10;
};

struct SuperPixel {
    std::vector<int> pixels;  // packed r * width + c, ascending
    double centroid_row = 0.0;
    double centroid_col = 0.0;
    double mean_l = 0.0, mean_a = 0.0, mean_b = 0.0;
};

struct SuperPixelSet {
    Image<int> labels;  // one label in [0, count) per pixel
    int count = 0;
    std::vector<SuperPixel> sps;
};

// Bounding-box view of one superpixel: n_x by n_x luma patch plus the
// binary mask of the SP's own pixels inside the box.
struct SpPatch {
    int sp_index = 0;
    int box_row = 0, box_col = 0;  // origin in frame coordinates
    int n_x = 0;
    Plane x;     // luma crop
    Mask m_sp;   // 1 on the SP's pixels
    int trimmed = 0;  // SP pixels that did not fit the box
};

// Grid seeding step S for the requested superpixel count.
double slic_grid_step(int width, int height, int target_count);

// SLIC k-means over (l,a,b,row,col), grid seeded, fixed iteration count,
// followed by connectivity enforcement. Deterministic.
SuperPixelSet slic_segment(const Frame& frame, const SlicParams& params);

SpPatch extract_patch(const SuperPixelSet& sps, const Frame& frame, int k, int n_x);

// Debug visualization: each label mapped to a repeatable pseudo-color.
Frame label_visualization(const SuperPixelSet& sps);

}  // namespace spac
