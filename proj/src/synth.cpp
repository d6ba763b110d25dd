#include "spac/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spac/rng.hpp"

namespace spac {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Streak {
    double cx, cy;     // center
    double dx, dy;     // unit direction
    double half_len;
    double sigma;
    double opacity;
};

// squared distance from p to the segment center +- half_len * dir
double dist2_to_segment(const Streak& s, double px, double py) {
    const double rx = px - s.cx, ry = py - s.cy;
    double t = rx * s.dx + ry * s.dy;
    t = std::clamp(t, -s.half_len, s.half_len);
    const double qx = rx - t * s.dx, qy = ry - t * s.dy;
    return qx * qx + qy * qy;
}

}  // namespace

void RainParams::validate() const {
    if (density < 0) throw std::invalid_argument("rain density must be >= 0");
    if (length_min > length_max || length_min <= 0)
        throw std::invalid_argument("bad streak length range");
    if (width_min > width_max || width_min <= 0)
        throw std::invalid_argument("bad streak width range");
    if (opacity_min > opacity_max || opacity_min < 0 || opacity_max > 1)
        throw std::invalid_argument("bad streak opacity range");
    if (blur_samples < 1) throw std::invalid_argument("blur_samples must be >= 1");
    if (eps_gt <= 0) throw std::invalid_argument("eps_gt must be > 0");
}

RainyFrame synthesize_rain(const Frame& clean, const RainParams& params, int frame_index) {
    params.validate();
    const int h = clean.y.rows, w = clean.y.cols;
    RainyFrame out;
    out.frame = clean;
    out.gt_boost = Plane(h, w, 0.0);
    out.gt_mask = Mask(h, w, 0);

    // One RNG stream per frame so frames can be rendered in any order; with
    // fall_speed the same streak set is reused and translated instead.
    const bool falling = params.fall_speed > 0.0;
    rng::Engine eng(falling ? rng::mix(params.seed, 0x5261696e)
                            : rng::mix(params.seed, static_cast<std::uint64_t>(frame_index)));

    const double area_mpx = static_cast<double>(w) * h / 1e6;
    const long count = rng::poisson(eng, params.density * area_mpx);
    const double pad = 0.5 * params.length_max + 1.5 * params.width_max + 1.0;
    const double wrap = h + 2.0 * pad;

    std::vector<Streak> streaks;
    streaks.reserve(count);
    for (long i = 0; i < count; ++i) {
        Streak s;
        s.cx = rng::uniform(eng, -pad, w + pad);
        s.cy = rng::uniform(eng, -pad, h + pad);
        const double len = rng::uniform(eng, params.length_min, params.length_max);
        const double width = rng::uniform(eng, params.width_min, params.width_max);
        const double ang_deg =
            params.angle_mean_deg + rng::uniform(eng, -params.angle_jitter_deg, params.angle_jitter_deg);
        const double ang = ang_deg * kPi / 180.0;
        s.dx = std::sin(ang);
        s.dy = std::cos(ang);  // y grows downward; 0 degrees = vertical fall
        s.half_len = 0.5 * len;
        s.sigma = 0.5 * width;
        s.opacity = rng::uniform(eng, params.opacity_min, params.opacity_max);
        if (falling) {
            s.cy += params.fall_speed * frame_index;
            s.cy = -pad + std::fmod(s.cy + pad, wrap);
            if (s.cy < -pad) s.cy += wrap;
        }
        streaks.push_back(s);
    }

    const int m = params.blur_samples;
    for (const Streak& s : streaks) {
        const double reach = s.half_len + 3.0 * s.sigma + 1.0;
        const int r0 = std::max(0, static_cast<int>(std::floor(s.cy - reach)));
        const int r1 = std::min(h - 1, static_cast<int>(std::ceil(s.cy + reach)));
        const int c0 = std::max(0, static_cast<int>(std::floor(s.cx - reach)));
        const int c1 = std::min(w - 1, static_cast<int>(std::ceil(s.cx + reach)));
        const double inv2s2 = 1.0 / (2.0 * s.sigma * s.sigma);
#pragma omp parallel for schedule(static)
        for (int r = r0; r <= r1; ++r) {
            double* pb = out.gt_boost.row(r);
            for (int c = c0; c <= c1; ++c) {
                double acc = 0.0;
                for (int sr = 0; sr < m; ++sr) {
                    const double oy = (sr + 0.5) / m - 0.5;
                    for (int sc = 0; sc < m; ++sc) {
                        const double ox = (sc + 0.5) / m - 0.5;
                        acc += std::exp(-dist2_to_segment(s, c + ox, r + oy) * inv2s2);
                    }
                }
                pb[c] += s.opacity * acc / (m * m);
            }
        }
    }

    for (int r = 0; r < h; ++r) {
        const double* pb = out.gt_boost.row(r);
        double* py = out.frame.y.row(r);
        std::uint8_t* pm = out.gt_mask.row(r);
        for (int c = 0; c < w; ++c) {
            py[c] = clamp01(py[c] + pb[c]);
            pm[c] = pb[c] >= params.eps_gt ? 1 : 0;
        }
    }
    return out;
}

}  // namespace spac
