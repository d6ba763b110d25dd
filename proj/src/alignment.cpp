#include "spac/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spac {

Window make_window(const FrameSequence& seq, int center, int n_t) {
    if (n_t < 3 || n_t % 2 == 0) throw std::runtime_error("window length must be odd and >= 3");
    const int n = static_cast<int>(seq.size());
    if (center < 0 || center >= n) throw std::runtime_error("window center out of range");
    const int half = (n_t - 1) / 2;
    Window window;
    for (int t = -half; t <= half; ++t) {
        const int i = center + t;
        if (i < 0 || i >= n) continue;
        window.push_back({&seq.frames[i], t});
    }
    if (static_cast<int>(window.size()) < 3) {
        throw std::runtime_error("sequence too short for a 3-frame window");
    }
    return window;
}

int SearchBuffer::index_of_t(int t) const {
    for (size_t i = 0; i < rel_t.size(); ++i) {
        if (rel_t[i] == t) return static_cast<int>(i);
    }
    return -1;
}

SearchBuffer build_buffer(const Window& window, const SpPatch& patch, int n_s) {
    if (n_s < 1) throw std::runtime_error("build_buffer: n_s must be >= 1");
    SearchBuffer buf;
    buf.n_x = patch.n_x;
    buf.n_s = n_s;
    buf.box_row = patch.box_row;
    buf.box_col = patch.box_col;

    const int lo = buf.offset_lo();
    const int ext = patch.n_x + n_s;
    const int origin_r = patch.box_row + lo;
    const int origin_c = patch.box_col + lo;

    for (const WindowFrame& wf : window) {
        const Frame& frame = *wf.frame;
        const int h = frame.height(), w = frame.width();
        Plane slice(ext, ext);
        for (int r = 0; r < ext; ++r) {
            const int fr = std::clamp(origin_r + r, 0, h - 1);
            for (int c = 0; c < ext; ++c) {
                const int fc = std::clamp(origin_c + c, 0, w - 1);
                slice(r, c) = frame.y(fr, fc);
            }
        }
        Mask valid(n_s, n_s);
        for (int i = 0; i < n_s; ++i) {
            const int du = lo + i;
            const int br = patch.box_row + du;
            const bool row_ok = br >= 0 && br + patch.n_x <= h;
            for (int j = 0; j < n_s; ++j) {
                const int dv = lo + j;
                const int bc = patch.box_col + dv;
                valid(i, j) = (row_ok && bc >= 0 && bc + patch.n_x <= w) ? 1 : 0;
            }
        }
        buf.slices.push_back(std::move(slice));
        buf.valid.push_back(std::move(valid));
        buf.rel_t.push_back(wf.t);
    }
    buf.t0_index = buf.index_of_t(0);
    if (buf.t0_index < 0) throw std::runtime_error("build_buffer: window lacks the target frame");
    return buf;
}

double masked_ssd(const Plane& patch, const Mask& mask, const Plane& slice, int slice_row,
                  int slice_col) {
    double cost = 0.0;
    for (int r = 0; r < patch.rows; ++r) {
        const double* ps = slice.row(slice_row + r) + slice_col;
        const double* pp = patch.row(r);
        const std::uint8_t* pm = mask.row(r);
        for (int c = 0; c < patch.cols; ++c) {
            if (pm[c]) {
                const double d = ps[c] - pp[c];
                cost += d * d;
            }
        }
    }
    return cost;
}

Plane offset_cost_map(const SpPatch& patch, const Mask& mask, const SearchBuffer& buffer,
                      int slice_index) {
    const int n_s = buffer.n_s;
    const Plane& slice = buffer.slices[slice_index];
    const Mask& valid = buffer.valid[slice_index];
    Plane costs(n_s, n_s, std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_s; ++i) {
        for (int j = 0; j < n_s; ++j) {
            if (valid(i, j)) {
                // slice(i + r, j + c) holds frame(box + offset + (r,c)).
                costs(i, j) = masked_ssd(patch.x, mask, slice, i, j);
            }
        }
    }
    return costs;
}

namespace {

// Tie order: cost, then offset radius, then row-major offset, then t.
bool better(double cost, int du, int dv, int t, const MatchEntry& best) {
    if (cost != best.cost) return cost < best.cost;
    const int r2 = du * du + dv * dv;
    const int br2 = best.du * best.du + best.dv * best.dv;
    if (r2 != br2) return r2 < br2;
    if (du != best.du) return du < best.du;
    if (dv != best.dv) return dv < best.dv;
    return t < best.t;
}

Plane copy_patch_at(const SearchBuffer& buffer, int slice_index, int du, int dv) {
    const int lo = buffer.offset_lo();
    const Plane& slice = buffer.slices[slice_index];
    Plane out(buffer.n_x, buffer.n_x);
    const int r0 = du - lo, c0 = dv - lo;
    for (int r = 0; r < buffer.n_x; ++r) {
        const double* src = slice.row(r0 + r) + c0;
        std::copy(src, src + buffer.n_x, out.row(r));
    }
    return out;
}

}  // namespace

MatchEntry match_optimal(const SpPatch& patch, const SearchBuffer& buffer, int t) {
    const int si = buffer.index_of_t(t);
    if (si < 0) throw std::runtime_error("match_optimal: frame not in window");
    if (count_nonzero(patch.m_sp) == 0) throw std::runtime_error("match_optimal: empty mask");

    const Plane costs = offset_cost_map(patch, patch.m_sp, buffer, si);
    const int lo = buffer.offset_lo();
    MatchEntry best{t, 0, 0, std::numeric_limits<double>::infinity()};
    bool found = false;
    for (int i = 0; i < buffer.n_s; ++i) {
        for (int j = 0; j < buffer.n_s; ++j) {
            const double cost = costs(i, j);
            if (!std::isfinite(cost)) continue;
            const int du = lo + i, dv = lo + j;
            if (!found || better(cost, du, dv, t, best)) {
                best = {t, du, dv, cost};
                found = true;
            }
        }
    }
    if (!found) throw std::runtime_error("match_optimal: no valid offsets");
    return best;
}

SpacTensor build_t0(const SpPatch& patch, const SearchBuffer& buffer) {
    SpacTensor t0;
    for (int si = 0; si < buffer.slice_count(); ++si) {
        const int t = buffer.rel_t[si];
        if (t == 0) {
            Plane self = patch.x;
            t0.slices.push_back(std::move(self));
            t0.provenance.push_back({0, 0, 0, 0.0});
        } else {
            const MatchEntry m = match_optimal(patch, buffer, t);
            t0.slices.push_back(copy_patch_at(buffer, si, m.du, m.dv));
            t0.provenance.push_back(m);
        }
    }
    return t0;
}

SpacTensor build_t1(const SpPatch& patch, const SearchBuffer& buffer, const Mask& m_rsp, int n_st,
                    bool exclude_current_frame) {
    if (count_nonzero(m_rsp) == 0) {
        throw std::runtime_error("build_t1: rain mask covers entire SP");
    }
    const int lo = buffer.offset_lo();

    std::vector<MatchEntry> candidates;
    for (int si = 0; si < buffer.slice_count(); ++si) {
        const int t = buffer.rel_t[si];
        if (t == 0 && exclude_current_frame) continue;
        const Plane costs = offset_cost_map(patch, m_rsp, buffer, si);
        for (int i = 0; i < buffer.n_s; ++i) {
            for (int j = 0; j < buffer.n_s; ++j) {
                if (!std::isfinite(costs(i, j))) continue;
                const int du = lo + i, dv = lo + j;
                if (t == 0 && du == 0 && dv == 0) continue;  // self-match
                candidates.push_back({t, du, dv, costs(i, j)});
            }
        }
    }
    if (static_cast<int>(candidates.size()) < n_st) {
        throw std::runtime_error("build_t1: fewer candidates than n_st");
    }

    std::partial_sort(candidates.begin(), candidates.begin() + n_st, candidates.end(),
                      [](const MatchEntry& a, const MatchEntry& b) {
                          if (a.cost != b.cost) return a.cost < b.cost;
                          const int ar = a.du * a.du + a.dv * a.dv;
                          const int br = b.du * b.du + b.dv * b.dv;
                          if (ar != br) return ar < br;
                          if (a.du != b.du) return a.du < b.du;
                          if (a.dv != b.dv) return a.dv < b.dv;
                          return a.t < b.t;
                      });
    candidates.resize(n_st);

    SpacTensor t1;
    for (const MatchEntry& m : candidates) {
        t1.slices.push_back(copy_patch_at(buffer, buffer.index_of_t(m.t), m.du, m.dv));
        t1.provenance.push_back(m);
    }
    return t1;
}

Plane slice_average(const SpacTensor& tensor) {
    if (tensor.slices.empty()) throw std::runtime_error("slice_average: empty tensor");
    Plane avg(tensor.slices[0].rows, tensor.slices[0].cols, 0.0);
    for (const Plane& s : tensor.slices) {
        for (size_t i = 0; i < avg.size(); ++i) avg.data[i] += s.data[i];
    }
    const double inv = 1.0 / static_cast<double>(tensor.slices.size());
    for (double& v : avg.data) v *= inv;
    return avg;
}

}  // namespace spac
