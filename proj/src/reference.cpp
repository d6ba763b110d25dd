#include "spac/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spac::ref {

namespace {

bool better_ref(const MatchEntry& a, const MatchEntry& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    const int ar = a.du * a.du + a.dv * a.dv;
    const int br = b.du * b.du + b.dv * b.dv;
    if (ar != br) return ar < br;
    if (a.du != b.du) return a.du < b.du;
    if (a.dv != b.dv) return a.dv < b.dv;
    return a.t < b.t;
}

}  // namespace

double masked_ssd_frame(const Plane& y, const Plane& tpl, const Mask& mask, int row0, int col0) {
    double cost = 0.0;
    for (int r = 0; r < tpl.rows; ++r) {
        for (int c = 0; c < tpl.cols; ++c) {
            if (mask(r, c)) {
                const double d = y(row0 + r, col0 + c) - tpl(r, c);
                cost += d * d;
            }
        }
    }
    return cost;
}

bool offset_in_frame(const Plane& y, int n_x, int row0, int col0) {
    return row0 >= 0 && col0 >= 0 && row0 + n_x <= y.rows && col0 + n_x <= y.cols;
}

MatchEntry best_match(const Plane& y, int t, const SpPatch& patch, const Mask& mask, int n_s) {
    const int lo = -(n_s / 2);
    MatchEntry best{t, 0, 0, std::numeric_limits<double>::infinity()};
    bool found = false;
    for (int i = 0; i < n_s; ++i) {
        for (int j = 0; j < n_s; ++j) {
            const int du = lo + i, dv = lo + j;
            const int row0 = patch.box_row + du, col0 = patch.box_col + dv;
            if (!offset_in_frame(y, patch.n_x, row0, col0)) continue;
            const MatchEntry cand{t, du, dv, masked_ssd_frame(y, patch.x, mask, row0, col0)};
            if (!found || better_ref(cand, best)) {
                best = cand;
                found = true;
            }
        }
    }
    if (!found) throw std::runtime_error("reference: no valid offsets");
    return best;
}

std::vector<MatchEntry> ranked_matches(const Window& window, const SpPatch& patch,
                                       const Mask& m_rsp, int n_s, int n_st,
                                       bool exclude_current_frame) {
    const int lo = -(n_s / 2);
    std::vector<MatchEntry> pool;
    for (const WindowFrame& wf : window) {
        if (wf.t == 0 && exclude_current_frame) continue;
        const Plane& y = wf.frame->y;
        for (int i = 0; i < n_s; ++i) {
            for (int j = 0; j < n_s; ++j) {
                const int du = lo + i, dv = lo + j;
                if (wf.t == 0 && du == 0 && dv == 0) continue;
                const int row0 = patch.box_row + du, col0 = patch.box_col + dv;
                if (!offset_in_frame(y, patch.n_x, row0, col0)) continue;
                pool.push_back({wf.t, du, dv, masked_ssd_frame(y, patch.x, m_rsp, row0, col0)});
            }
        }
    }
    if (static_cast<int>(pool.size()) < n_st)
        throw std::runtime_error("reference: fewer candidates than n_st");
    std::stable_sort(pool.begin(), pool.end(), better_ref);
    pool.resize(n_st);
    return pool;
}

Tensor3 conv_naive(const ConvLayer& layer, const Tensor3& in) {
    if (in.ch != layer.in_ch) throw std::invalid_argument("conv_naive channel mismatch");
    const int n = in.rows, m = in.cols, k = layer.k, pad = k / 2;
    Tensor3 out(layer.out_ch, n, m);
    for (int o = 0; o < layer.out_ch; ++o) {
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < m; ++c) {
                double s = layer.b[o];
                for (int i = 0; i < layer.in_ch; ++i) {
                    for (int kr = 0; kr < k; ++kr) {
                        const int rr = r + kr - pad;
                        if (rr < 0 || rr >= n) continue;
                        for (int kc = 0; kc < k; ++kc) {
                            const int cc = c + kc - pad;
                            if (cc < 0 || cc >= m) continue;
                            s += layer.wat(o, i, kr, kc) * in(i, rr, cc);
                        }
                    }
                }
                out(o, r, c) = layer.relu ? std::max(0.0, s) : s;
            }
        }
    }
    return out;
}

double psnr_kahan(const Plane& a, const Plane& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("psnr shape mismatch");
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        const double term = d * d - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    const double mse = sum / a.data.size();
    if (mse <= 0.0) return 99.0;
    return std::min(99.0, -10.0 * std::log10(mse));
}

namespace {

std::vector<double> gauss1d() {
    std::vector<double> g(11);
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
        const double d = i - 5;
        g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
}

// Valid-region separable filter: output is (rows-10)×(cols-10).
Plane filter_valid(const Plane& in, const std::vector<double>& g) {
    const int k = static_cast<int>(g.size());
    Plane hpass(in.rows, in.cols - k + 1);
    for (int r = 0; r < in.rows; ++r) {
        for (int c = 0; c < hpass.cols; ++c) {
            double s = 0.0;
            for (int j = 0; j < k; ++j) s += g[j] * in(r, c + j);
            hpass(r, c) = s;
        }
    }
    Plane out(in.rows - k + 1, hpass.cols);
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            double s = 0.0;
            for (int j = 0; j < k; ++j) s += g[j] * hpass(r + j, c);
            out(r, c) = s;
        }
    }
    return out;
}

}  // namespace

double ssim_filtered(const Plane& a, const Plane& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim shape mismatch");
    if (a.rows < 11 || a.cols < 11) throw std::invalid_argument("ssim needs at least 11x11");
    const std::vector<double> g = gauss1d();
    Plane aa(a.rows, a.cols), bb(a.rows, a.cols), ab(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        aa.data[i] = a.data[i] * a.data[i];
        bb.data[i] = b.data[i] * b.data[i];
        ab.data[i] = a.data[i] * b.data[i];
    }
    const Plane ma = filter_valid(a, g), mb = filter_valid(b, g);
    const Plane maa = filter_valid(aa, g), mbb = filter_valid(bb, g), mab = filter_valid(ab, g);
    const double c1 = 1e-4, c2 = 9e-4;
    double total = 0.0;
    for (int r = 0; r < ma.rows; ++r) {
        for (int c = 0; c < ma.cols; ++c) {
            const double ua = ma(r, c), ub = mb(r, c);
            const double va = maa(r, c) - ua * ua;
            const double vb = mbb(r, c) - ub * ub;
            const double cov = mab(r, c) - ua * ub;
            total += (2 * ua * ub + c1) * (2 * cov + c2) /
                     ((ua * ua + ub * ub + c1) * (va + vb + c2));
        }
    }
    return total / (static_cast<double>(ma.rows) * ma.cols);
}

}  // namespace spac::ref
