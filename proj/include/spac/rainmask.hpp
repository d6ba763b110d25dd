#pragma once

#include <vector>

#include "spac/alignment.hpp"
#include "spac/image.hpp"
#include "spac/superpixel.hpp"

namespace spac {

struct RainMask {
    Mask m_hat;   // positive temporal fluctuation vote
    Mask m_e;     // chroma edge veto
    Mask m_rain;  // m_hat & !m_e
};

// Positive temporal fluctuations: slice t is 1 where the target patch
// exceeds the aligned slice by at least eps_rain (inclusive).
std::vector<Mask> fluctuation_tensor(const SpPatch& patch, const SpacTensor& t0, double eps_rain);

// Pixels with at least vote_threshold positive fluctuations.
Mask initial_rain_mask(const std::vector<Mask>& m0, int vote_threshold = 3);

// Vote threshold for a shrunken window of `available` frames against the
// nominal n_t; `nominal` is the full-window threshold.
int scaled_vote_threshold(int available, int n_t, int nominal = 3);

// Sum of Cb/Cr gradient magnitudes on the box crop, thresholded at eps_e.
// Central differences inside, one-sided at the crop borders.
Mask chroma_edge_map(const Frame& frame, int box_row, int box_col, int n_x, double eps_e);

Mask final_rain_mask(const Mask& m_hat, const Mask& m_e);

RainMask compute_rain_mask(const SpPatch& patch, const SpacTensor& t0, const Frame& frame,
                           double eps_rain, double eps_e, int vote_threshold = 3);

}  // namespace spac
