#include "spac/rainmask.hpp"

#include <cmath>
#include <stdexcept>

namespace spac {

std::vector<Mask> fluctuation_tensor(const SpPatch& patch, const SpacTensor& t0, double eps_rain) {
    std::vector<Mask> m0;
    m0.reserve(t0.slices.size());
    for (std::size_t s = 0; s < t0.slices.size(); ++s) {
        const Plane& slice = t0.slices[s];
        Mask m(patch.n_x, patch.n_x);
        for (int r = 0; r < patch.n_x; ++r) {
            const double* pp = patch.x.row(r);
            const double* ps = slice.row(r);
            const std::uint8_t* pm = patch.m_sp.row(r);
            std::uint8_t* po = m.row(r);
            for (int c = 0; c < patch.n_x; ++c)
                po[c] = (pm[c] && pp[c] - ps[c] >= eps_rain) ? 1 : 0;
        }
        m0.push_back(std::move(m));
    }
    return m0;
}

Mask initial_rain_mask(const std::vector<Mask>& m0, int vote_threshold) {
    if (m0.empty()) throw std::invalid_argument("empty fluctuation tensor");
    const int h = m0[0].rows, w = m0[0].cols;
    Mask out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            int votes = 0;
            for (const Mask& m : m0) votes += m(r, c);
            out(r, c) = votes >= vote_threshold ? 1 : 0;
        }
    }
    return out;
}

int scaled_vote_threshold(int available, int n_t, int nominal) {
    if (available >= n_t) return nominal;
    // Scale the nominal vote-of-(n_t-1) to the shrunken window; never drop
    // below 2 or a lone fluctuation would count as rain.
    const int v = static_cast<int>(std::lround(static_cast<double>(nominal) * (available - 1) / (n_t - 1)));
    return v < 2 ? 2 : v;
}

Mask chroma_edge_map(const Frame& frame, int box_row, int box_col, int n_x, double eps_e) {
    const Plane* chans[2] = {&frame.cb, &frame.cr};
    Mask out(n_x, n_x);
    for (int r = 0; r < n_x; ++r) {
        for (int c = 0; c < n_x; ++c) {
            double mag = 0.0;
            for (const Plane* ch : chans) {
                const Plane& p = *ch;
                const int gr = box_row + r, gc = box_col + c;
                // derivative over the crop, not the frame: one-sided at crop edges
                double gx, gy;
                if (c == 0)
                    gx = p(gr, gc + 1) - p(gr, gc);
                else if (c == n_x - 1)
                    gx = p(gr, gc) - p(gr, gc - 1);
                else
                    gx = 0.5 * (p(gr, gc + 1) - p(gr, gc - 1));
                if (r == 0)
                    gy = p(gr + 1, gc) - p(gr, gc);
                else if (r == n_x - 1)
                    gy = p(gr, gc) - p(gr - 1, gc);
                else
                    gy = 0.5 * (p(gr + 1, gc) - p(gr - 1, gc));
                mag += std::sqrt(gx * gx + gy * gy);
            }
            out(r, c) = mag >= eps_e ? 1 : 0;
        }
    }
    return out;
}

Mask final_rain_mask(const Mask& m_hat, const Mask& m_e) {
    if (!m_hat.same_shape(m_e)) throw std::invalid_argument("rain mask shape mismatch");
    Mask out(m_hat.rows, m_hat.cols);
    for (int r = 0; r < m_hat.rows; ++r)
        for (int c = 0; c < m_hat.cols; ++c) out(r, c) = (m_hat(r, c) && !m_e(r, c)) ? 1 : 0;
    return out;
}

RainMask compute_rain_mask(const SpPatch& patch, const SpacTensor& t0, const Frame& frame,
                           double eps_rain, double eps_e, int vote_threshold) {
    RainMask rm;
    rm.m_hat = initial_rain_mask(fluctuation_tensor(patch, t0, eps_rain), vote_threshold);
    rm.m_e = chroma_edge_map(frame, patch.box_row, patch.box_col, patch.n_x, eps_e);
    rm.m_rain = final_rain_mask(rm.m_hat, rm.m_e);
    return rm;
}

}  // namespace spac
