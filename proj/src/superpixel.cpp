#include "spac/superpixel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "spac/frame_io.hpp"

namespace spac {

namespace {

struct LabImage {
    std::vector<float> l, a, b;
};

double srgb_linearize(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
    constexpr double kDelta3 = 216.0 / 24389.0;
    return t > kDelta3 ? std::cbrt(t) : (841.0 / 108.0) * t + 4.0 / 29.0;
}

// YCbCr frame -> CIELAB (D65), L in [0,100].
LabImage to_lab(const Frame& frame) {
    const int n = frame.height() * frame.width();
    LabImage lab;
    lab.l.resize(n);
    lab.a.resize(n);
    lab.b.resize(n);
    for (int i = 0; i < n; ++i) {
        const Rgb rgb = ycbcr_to_rgb(frame.y.data[i], frame.cb.data[i], frame.cr.data[i]);
        const double rl = srgb_linearize(rgb.r);
        const double gl = srgb_linearize(rgb.g);
        const double bl = srgb_linearize(rgb.b);
        const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
        const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
        const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
        const double fx = lab_f(x / 0.95047);
        const double fy = lab_f(y);
        const double fz = lab_f(z / 1.08883);
        lab.l[i] = static_cast<float>(116.0 * fy - 16.0);
        lab.a[i] = static_cast<float>(500.0 * (fx - fy));
        lab.b[i] = static_cast<float>(200.0 * (fy - fz));
    }
    return lab;
}

struct Cluster {
    double l = 0, a = 0, b = 0, row = 0, col = 0;
};

// Squared color gradient at (r,c), used for seed perturbation.
double color_gradient(const LabImage& lab, int w, int h, int r, int c) {
    auto px = [&](int rr, int cc) {
        const int i = rr * w + cc;
        return std::array<double, 3>{lab.l[i], lab.a[i], lab.b[i]};
    };
    const int r0 = std::max(r - 1, 0), r1 = std::min(r + 1, h - 1);
    const int c0 = std::max(c - 1, 0), c1 = std::min(c + 1, w - 1);
    const auto xh = px(r, c1), xl = px(r, c0), yh = px(r1, c), yl = px(r0, c);
    double g = 0;
    for (int k = 0; k < 3; ++k) {
        g += (xh[k] - xl[k]) * (xh[k] - xl[k]) + (yh[k] - yl[k]) * (yh[k] - yl[k]);
    }
    return g;
}

}  // namespace

double slic_grid_step(int width, int height, int target_count) {
    return std::sqrt(static_cast<double>(width) * height / target_count);
}

SuperPixelSet slic_segment(const Frame& frame, const SlicParams& params) {
    const int h = frame.height(), w = frame.width();
    if (h <= 0 || w <= 0) throw std::runtime_error("slic: empty frame");
    const int k = params.target_count;
    if (k < 1) throw std::runtime_error("slic: target_count must be >= 1");
    if (k > w * h) throw std::runtime_error("slic: target_count exceeds pixel count");

    const LabImage lab = to_lab(frame);
    const double step = slic_grid_step(w, h, k);

    // Near-square seed grid with n_rows * n_cols close to the request.
    int n_rows = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(k) * h / w))));
    n_rows = std::min(n_rows, h);
    int n_cols = std::max(1, static_cast<int>(std::lround(static_cast<double>(k) / n_rows)));
    n_cols = std::min(n_cols, w);

    std::vector<Cluster> clusters;
    clusters.reserve(static_cast<size_t>(n_rows) * n_cols);
    for (int j = 0; j < n_rows; ++j) {
        for (int i = 0; i < n_cols; ++i) {
            int r = static_cast<int>(std::lround((j + 0.5) * h / n_rows - 0.5));
            int c = static_cast<int>(std::lround((i + 0.5) * w / n_cols - 0.5));
            r = std::clamp(r, 0, h - 1);
            c = std::clamp(c, 0, w - 1);
            // Move to the lowest-gradient spot in the 3x3 neighborhood.
            double best = color_gradient(lab, w, h, r, c);
            int br = r, bc = c;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                    const double g = color_gradient(lab, w, h, rr, cc);
                    if (g < best) {
                        best = g;
                        br = rr;
                        bc = cc;
                    }
                }
            }
            const int idx = br * w + bc;
            clusters.push_back({lab.l[idx], lab.a[idx], lab.b[idx],
                                static_cast<double>(br), static_cast<double>(bc)});
        }
    }

    const double spatial_weight = params.compactness / step;
    std::vector<int> label(static_cast<size_t>(h) * w, -1);
    std::vector<double> dist(static_cast<size_t>(h) * w);

    for (int it = 0; it < params.iterations; ++it) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        for (size_t ci = 0; ci < clusters.size(); ++ci) {
            const Cluster& cl = clusters[ci];
            const int r0 = std::max(0, static_cast<int>(std::floor(cl.row - step)));
            const int r1 = std::min(h - 1, static_cast<int>(std::ceil(cl.row + step)));
            const int c0 = std::max(0, static_cast<int>(std::floor(cl.col - step)));
            const int c1 = std::min(w - 1, static_cast<int>(std::ceil(cl.col + step)));
            for (int r = r0; r <= r1; ++r) {
                for (int c = c0; c <= c1; ++c) {
                    const int i = r * w + c;
                    const double dl = lab.l[i] - cl.l;
                    const double da = lab.a[i] - cl.a;
                    const double db = lab.b[i] - cl.b;
                    const double d_lab = std::sqrt(dl * dl + da * da + db * db);
                    const double dr = r - cl.row, dc = c - cl.col;
                    const double d_xy = std::sqrt(dr * dr + dc * dc);
                    const double d = d_lab + spatial_weight * d_xy;
                    if (d < dist[i]) {
                        dist[i] = d;
                        label[i] = static_cast<int>(ci);
                    }
                }
            }
        }
        // Update cluster means.
        std::vector<Cluster> acc(clusters.size());
        std::vector<int> cnt(clusters.size(), 0);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const int i = r * w + c;
                const int ci = label[i];
                if (ci < 0) continue;
                acc[ci].l += lab.l[i];
                acc[ci].a += lab.a[i];
                acc[ci].b += lab.b[i];
                acc[ci].row += r;
                acc[ci].col += c;
                ++cnt[ci];
            }
        }
        for (size_t ci = 0; ci < clusters.size(); ++ci) {
            if (cnt[ci] == 0) continue;  // empty cluster keeps its center
            const double inv = 1.0 / cnt[ci];
            clusters[ci] = {acc[ci].l * inv, acc[ci].a * inv, acc[ci].b * inv,
                            acc[ci].row * inv, acc[ci].col * inv};
        }
    }

    // Pixels outside every search window (possible on extreme aspect ratios):
    // assign to the nearest cluster center.
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int i = r * w + c;
            if (label[i] >= 0) continue;
            double best = std::numeric_limits<double>::infinity();
            for (size_t ci = 0; ci < clusters.size(); ++ci) {
                const double dr = r - clusters[ci].row, dc = c - clusters[ci].col;
                const double d = dr * dr + dc * dc;
                if (d < best) {
                    best = d;
                    label[i] = static_cast<int>(ci);
                }
            }
        }
    }

    // Connectivity enforcement: relabel 4-connected components in scan order;
    // components below min_size are absorbed into the adjacent component
    // recorded during the flood fill.
    const int min_size = std::max(1, (w * h / k) / 4);
    std::vector<int> new_label(static_cast<size_t>(h) * w, -1);
    int next = 0;
    std::vector<int> component;
    const int dr4[] = {-1, 0, 1, 0};
    const int dc4[] = {0, -1, 0, 1};
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int start = r * w + c;
            if (new_label[start] >= 0) continue;
            component.clear();
            component.push_back(start);
            new_label[start] = next;
            int adjacent = -1;
            for (size_t qi = 0; qi < component.size(); ++qi) {
                const int p = component[qi];
                const int pr = p / w, pc = p % w;
                for (int d = 0; d < 4; ++d) {
                    const int rr = pr + dr4[d], cc = pc + dc4[d];
                    if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                    const int q = rr * w + cc;
                    if (new_label[q] < 0 && label[q] == label[start]) {
                        new_label[q] = next;
                        component.push_back(q);
                    } else if (new_label[q] >= 0 && new_label[q] != next && adjacent < 0) {
                        adjacent = new_label[q];
                    }
                }
            }
            if (static_cast<int>(component.size()) < min_size && adjacent >= 0) {
                for (int p : component) new_label[p] = adjacent;
            } else {
                ++next;
            }
        }
    }

    // Compact labels (absorption may have left gaps) and build per-SP data.
    std::vector<int> remap(next, -1);
    int count = 0;
    for (int i = 0; i < h * w; ++i) {
        const int l = new_label[i];
        if (remap[l] < 0) remap[l] = count++;
    }

    SuperPixelSet out;
    out.labels = Image<int>(h, w);
    out.count = count;
    out.sps.resize(count);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int i = r * w + c;
            const int l = remap[new_label[i]];
            out.labels(r, c) = l;
            SuperPixel& sp = out.sps[l];
            sp.pixels.push_back(i);
            sp.centroid_row += r;
            sp.centroid_col += c;
            sp.mean_l += lab.l[i];
            sp.mean_a += lab.a[i];
            sp.mean_b += lab.b[i];
        }
    }
    for (SuperPixel& sp : out.sps) {
        const double inv = 1.0 / static_cast<double>(sp.pixels.size());
        sp.centroid_row *= inv;
        sp.centroid_col *= inv;
        sp.mean_l *= inv;
        sp.mean_a *= inv;
        sp.mean_b *= inv;
    }
    return out;
}

SpPatch extract_patch(const SuperPixelSet& sps, const Frame& frame, int k, int n_x) {
    const int h = frame.height(), w = frame.width();
    if (k < 0 || k >= sps.count) throw std::runtime_error("extract_patch: bad SP index");
    if (n_x > std::min(w, h)) throw std::runtime_error("extract_patch: box exceeds frame");
    const SuperPixel& sp = sps.sps[k];

    auto make_box = [&](double center_r, double center_c) {
        const int br = std::clamp(static_cast<int>(std::lround(center_r)) - n_x / 2, 0, h - n_x);
        const int bc = std::clamp(static_cast<int>(std::lround(center_c)) - n_x / 2, 0, w - n_x);
        return std::pair<int, int>{br, bc};
    };

    auto fill_mask = [&](int br, int bc, Mask& m) {
        m = Mask(n_x, n_x);
        int inside = 0;
        for (int p : sp.pixels) {
            const int r = p / w - br, c = p % w - bc;
            if (r >= 0 && r < n_x && c >= 0 && c < n_x) {
                m(r, c) = 1;
                ++inside;
            }
        }
        return inside;
    };

    SpPatch patch;
    patch.sp_index = k;
    patch.n_x = n_x;
    auto [br, bc] = make_box(sp.centroid_row, sp.centroid_col);
    int inside = fill_mask(br, bc, patch.m_sp);
    if (inside < static_cast<int>(sp.pixels.size())) {
        // SP spills out of the centroid-centered box: recenter on the tight
        // bounding box and drop whatever still does not fit.
        int rmin = h, rmax = -1, cmin = w, cmax = -1;
        for (int p : sp.pixels) {
            const int r = p / w, c = p % w;
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
        std::tie(br, bc) = make_box(0.5 * (rmin + rmax), 0.5 * (cmin + cmax));
        inside = fill_mask(br, bc, patch.m_sp);
    }
    patch.box_row = br;
    patch.box_col = bc;
    patch.trimmed = static_cast<int>(sp.pixels.size()) - inside;
    if (inside == 0) throw std::runtime_error("extract_patch: empty mask");

    patch.x = Plane(n_x, n_x);
    for (int r = 0; r < n_x; ++r) {
        for (int c = 0; c < n_x; ++c) patch.x(r, c) = frame.y(br + r, bc + c);
    }
    return patch;
}

Frame label_visualization(const SuperPixelSet& sps) {
    const int h = sps.labels.rows, w = sps.labels.cols;
    Frame out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const unsigned l = static_cast<unsigned>(sps.labels(r, c));
            const unsigned hash = l * 2654435761u;
            const double rr = ((hash >> 16) & 0xff) / 255.0;
            const double gg = ((hash >> 8) & 0xff) / 255.0;
            const double bb = (hash & 0xff) / 255.0;
            const Ycbcr s = rgb_to_ycbcr(0.25 + 0.75 * rr, 0.25 + 0.75 * gg, 0.25 + 0.75 * bb);
            out.y(r, c) = s.y;
            out.cb(r, c) = s.cb;
            out.cr(r, c) = s.cr;
        }
    }
    return out;
}

}  // namespace spac
