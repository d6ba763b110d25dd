#include "spac/scene.hpp"

#include <cmath>
#include <stdexcept>

#include "spac/rng.hpp"

namespace spac {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Grating {
    double kx, ky;  // cycles per px
    double phase;
    double amp;
};

struct GratingSet {
    std::vector<Grating> luma;
    Grating cb, cr;
};

// Harmonic table is a pure function of the params, rebuilt on demand.
GratingSet make_gratings(const SceneParams& p) {
    GratingSet gs;
    rng::Engine eng(rng::mix(p.seed, 0x5363656e));
    const double log_lo = std::log(p.min_wavelength), log_hi = std::log(p.max_wavelength);
    double total = 0.0;
    std::vector<double> raw(p.harmonics);
    for (int i = 0; i < p.harmonics; ++i) {
        raw[i] = rng::uniform(eng, 0.5, 1.0);
        total += raw[i];
    }
    for (int i = 0; i < p.harmonics; ++i) {
        Grating g;
        const double lambda = std::exp(rng::uniform(eng, log_lo, log_hi));
        const double theta = rng::uniform(eng, 0.0, kPi);
        g.kx = std::cos(theta) / lambda;
        g.ky = std::sin(theta) / lambda;
        g.phase = rng::uniform(eng, 0.0, 2.0 * kPi);
        g.amp = p.amp * raw[i] / total;  // amplitudes sum to amp: luma stays in [base-amp, base+amp]
        gs.luma.push_back(g);
    }
    auto chroma_grating = [&]() {
        Grating g;
        const double theta = rng::uniform(eng, 0.0, kPi);
        g.kx = std::cos(theta) / p.chroma_wavelength;
        g.ky = std::sin(theta) / p.chroma_wavelength;
        g.phase = rng::uniform(eng, 0.0, 2.0 * kPi);
        g.amp = p.chroma_amp;
        return g;
    };
    gs.cb = chroma_grating();
    gs.cr = chroma_grating();
    return gs;
}

double eval(const Grating& g, double x, double y) {
    return g.amp * std::cos(2.0 * kPi * (g.kx * x + g.ky * y) + g.phase);
}

}  // namespace

void SceneParams::validate() const {
    if (width <= 0 || height <= 0 || frames <= 0) throw std::invalid_argument("bad scene dims");
    if (harmonics <= 0) throw std::invalid_argument("need at least one harmonic");
    if (min_wavelength <= 0 || min_wavelength > max_wavelength)
        throw std::invalid_argument("bad wavelength range");
    if (base - amp < 0.0 || base + amp > 1.0)
        throw std::invalid_argument("luma range leaves [0,1]");
    if (chroma_amp < 0 || chroma_amp > 0.4) throw std::invalid_argument("bad chroma amplitude");
}

double scene_luma_at(const SceneParams& params, double world_x, double world_y) {
    const GratingSet gs = make_gratings(params);
    double v = params.base;
    for (const Grating& g : gs.luma) v += eval(g, world_x, world_y);
    return v;
}

Frame render_scene_frame(const SceneParams& params, int frame_index) {
    params.validate();
    const GratingSet gs = make_gratings(params);
    Frame f(params.height, params.width);
    const double ox = params.vx * frame_index, oy = params.vy * frame_index;
#pragma omp parallel for schedule(static)
    for (int r = 0; r < params.height; ++r) {
        double* py = f.y.row(r);
        double* pcb = f.cb.row(r);
        double* pcr = f.cr.row(r);
        const double wy = r + oy;
        for (int c = 0; c < params.width; ++c) {
            const double wx = c + ox;
            double v = params.base;
            for (const Grating& g : gs.luma) v += eval(g, wx, wy);
            py[c] = v;
            pcb[c] = 0.5 + eval(gs.cb, wx, wy);
            pcr[c] = 0.5 + eval(gs.cr, wx, wy);
        }
    }
    return f;
}

FrameSequence render_scene(const SceneParams& params) {
    FrameSequence seq;
    for (int t = 0; t < params.frames; ++t) seq.push_back(render_scene_frame(params, t));
    return seq;
}

}  // namespace spac
