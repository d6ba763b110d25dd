#pragma once

#include <vector>

#include "spac/image.hpp"
#include "spac/superpixel.hpp"

namespace spac {

// One frame of the sliding window, tagged with its offset t relative to
// the target frame (t=0).
struct WindowFrame {
    const Frame* frame = nullptr;
    int t = 0;
};
using Window = std::vector<WindowFrame>;

// Window of up to n_t frames centered on `center`, shrunk at sequence
// boundaries. Throws if fewer than 3 frames are available.
Window make_window(const FrameSequence& seq, int center, int n_t);

// Per-SP spatial-temporal search volume. Each temporal slice stores the
// (n_x+n_s)^2 luma neighborhood of the target box, edge-replicated where
// it overruns the frame; candidate offsets whose shifted box leaves the
// frame are flagged invalid instead of being sampled from the padding.
struct SearchBuffer {
    int n_x = 0;
    int n_s = 0;                 // offsets span [-(n_s/2), -(n_s/2)+n_s-1]
    int box_row = 0, box_col = 0;
    std::vector<int> rel_t;      // ascending, contains 0
    int t0_index = -1;
    std::vector<Plane> slices;   // one (n_x+n_s)^2 plane per rel_t entry
    std::vector<Mask> valid;     // n_s x n_s validity per slice, indexed (du,dv)

    int offset_lo() const { return -(n_s / 2); }
    int slice_count() const { return static_cast<int>(slices.size()); }
    int index_of_t(int t) const;
};

struct MatchEntry {
    int t = 0;
    int du = 0, dv = 0;  // row, col offset
    double cost = 0.0;
};

// Stack of aligned n_x by n_x patches with per-slice provenance.
struct SpacTensor {
    std::vector<Plane> slices;
    std::vector<MatchEntry> provenance;

    int slice_count() const { return static_cast<int>(slices.size()); }
};

SearchBuffer build_buffer(const Window& window, const SpPatch& patch, int n_s);

// Masked SSD between the patch and the buffer slice content at offset
// (du,dv). Serial row-major accumulation; the brute-force oracle sums in
// the same order so results compare bit-exactly.
double masked_ssd(const Plane& patch, const Mask& mask, const Plane& slice, int slice_row,
                  int slice_col);

// Cost map over all offsets of one temporal slice; invalid offsets get +inf.
Plane offset_cost_map(const SpPatch& patch, const Mask& mask, const SearchBuffer& buffer,
                      int slice_index);

// Lowest-cost offset for frame t. Ties prefer small u^2+v^2, then
// row-major offset order.
MatchEntry match_optimal(const SpPatch& patch, const SearchBuffer& buffer, int t);

// One optimal match per frame; the t=0 slice is the target patch itself
// at forced zero offset.
SpacTensor build_t0(const SpPatch& patch, const SearchBuffer& buffer);

// Second matching pass against the rain-free template m_rsp: the n_st
// lowest-cost candidates over all frames and offsets, ascending by cost.
// The zero-offset self-match at t=0 is always excluded;
// exclude_current_frame drops the whole t=0 slice from the pool.
SpacTensor build_t1(const SpPatch& patch, const SearchBuffer& buffer, const Mask& m_rsp, int n_st,
                    bool exclude_current_frame = false);

Plane slice_average(const SpacTensor& tensor);

}  // namespace spac
