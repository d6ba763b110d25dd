// Production kernels vs their serial brute-force references.  Run after any
// change to the alignment or conv inner loops; the correctness columns double
// as a smoke check that the two paths still agree.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "spac/alignment.hpp"
#include "spac/cnn.hpp"
#include "spac/reference.hpp"
#include "spac/rng.hpp"
#include "spac/scene.hpp"
#include "spac/superpixel.hpp"
#include "spac/synth.hpp"

using namespace spac;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Fixture {
    FrameSequence seq;
    Window window;
    SpPatch patch;
    Mask m_rsp;
};

Fixture make_fixture(int n_x) {
    Fixture fx;
    SceneParams sp;
    sp.width = 240;
    sp.height = 180;
    sp.frames = 5;
    sp.vx = 1.3;
    sp.vy = -0.7;
    sp.seed = 42;
    FrameSequence clean = render_scene(sp);
    RainParams rp;
    rp.density = 300.0;
    rp.seed = 7;
    for (int i = 0; i < 5; ++i)
        fx.seq.push_back(synthesize_rain(clean.frames[i], rp, i).frame);
    fx.window = make_window(fx.seq, 2, 5);

    fx.patch.box_row = 60;
    fx.patch.box_col = 90;
    fx.patch.n_x = n_x;
    fx.patch.x = Plane(n_x, n_x);
    for (int r = 0; r < n_x; ++r)
        for (int c = 0; c < n_x; ++c)
            fx.patch.x(r, c) = fx.seq.frames[2].y(60 + r, 90 + c);
    fx.patch.m_sp = Mask(n_x, n_x);
    rng::Engine eng(5);
    for (auto& v : fx.patch.m_sp.data) v = rng::uniform01(eng) < 0.8 ? 1 : 0;
    fx.m_rsp = fx.patch.m_sp;
    for (auto& v : fx.m_rsp.data)
        if (v && rng::uniform01(eng) < 0.15) v = 0;
    return fx;
}

void bench_matching(int n_x, int n_s, int reps) {
    const Fixture fx = make_fixture(n_x);

    auto t0 = Clock::now();
    SearchBuffer buffer;
    std::vector<MatchEntry> prod;
    for (int r = 0; r < reps; ++r) {
        buffer = build_buffer(fx.window, fx.patch, n_s);
        prod.clear();
        for (const WindowFrame& wf : fx.window) prod.push_back(match_optimal(fx.patch, buffer, wf.t));
    }
    const double t_prod = ms_since(t0) / reps;

    t0 = Clock::now();
    std::vector<MatchEntry> refm;
    for (int r = 0; r < reps; ++r) {
        refm.clear();
        for (const WindowFrame& wf : fx.window)
            refm.push_back(ref::best_match(wf.frame->y, wf.t, fx.patch, fx.patch.m_sp, n_s));
    }
    const double t_ref = ms_since(t0) / reps;

    bool ok = true;
    for (std::size_t i = 0; i < prod.size(); ++i)
        ok = ok && prod[i].du == refm[i].du && prod[i].dv == refm[i].dv &&
             prod[i].cost == refm[i].cost;
    std::printf("%-26s n_x=%-3d n_s=%-3d  %9.3f ms  %9.3f ms  %5.2fx  %s\n", "match_optimal (5 frames)",
                n_x, n_s, t_prod, t_ref, t_ref / t_prod, ok ? "match" : "MISMATCH");
}

void bench_t1(int n_x, int n_s, int n_st, int reps) {
    const Fixture fx = make_fixture(n_x);
    const SearchBuffer buffer = build_buffer(fx.window, fx.patch, n_s);

    auto t0 = Clock::now();
    SpacTensor prod;
    for (int r = 0; r < reps; ++r) prod = build_t1(fx.patch, buffer, fx.m_rsp, n_st, false);
    const double t_prod = ms_since(t0) / reps;

    t0 = Clock::now();
    std::vector<MatchEntry> refc;
    for (int r = 0; r < reps; ++r)
        refc = ref::ranked_matches(fx.window, fx.patch, fx.m_rsp, n_s, n_st, false);
    const double t_ref = ms_since(t0) / reps;

    bool ok = prod.provenance.size() == refc.size();
    for (std::size_t i = 0; ok && i < refc.size(); ++i)
        ok = prod.provenance[i].t == refc[i].t && prod.provenance[i].du == refc[i].du &&
             prod.provenance[i].dv == refc[i].dv && prod.provenance[i].cost == refc[i].cost;
    std::printf("%-26s n_x=%-3d n_s=%-3d  %9.3f ms  %9.3f ms  %5.2fx  %s\n", "build_t1 ranking", n_x,
                n_s, t_prod, t_ref, t_ref / t_prod, ok ? "match" : "MISMATCH");
}

void bench_conv(int in_ch, int out_ch, int k, int n, int reps) {
    ConvLayer layer;
    layer.in_ch = in_ch;
    layer.out_ch = out_ch;
    layer.k = k;
    layer.relu = true;
    layer.w.resize(layer.weight_count());
    layer.b.resize(out_ch);
    rng::Engine eng(9);
    for (double& v : layer.w) v = rng::uniform(eng, -0.1, 0.1);
    for (double& v : layer.b) v = rng::uniform(eng, -0.01, 0.01);
    Tensor3 in(in_ch, n, n);
    for (double& v : in.data) v = rng::uniform(eng, -0.5, 0.5);

    auto t0 = Clock::now();
    Tensor3 prod;
    for (int r = 0; r < reps; ++r) prod = conv_forward(layer, in);
    const double t_prod = ms_since(t0) / reps;

    t0 = Clock::now();
    Tensor3 refo;
    for (int r = 0; r < reps; ++r) refo = ref::conv_naive(layer, in);
    const double t_ref = ms_since(t0) / reps;

    double max_err = 0.0;
    for (std::size_t i = 0; i < prod.data.size(); ++i)
        max_err = std::max(max_err, std::abs(prod.data[i] - refo.data[i]));
    char label[64];
    std::snprintf(label, sizeof label, "conv %dx%d k=%d", in_ch, out_ch, k);
    std::printf("%-26s n=%-3d        %9.3f ms  %9.3f ms  %5.2fx  %s (max err %.1e)\n", label, n,
                t_prod, t_ref, t_ref / t_prod, max_err < 1e-12 ? "match" : "MISMATCH", max_err);
}

}  // namespace

int main() {
    std::printf("%-26s %-13s %12s %12s %7s\n", "kernel", "size", "production", "reference",
                "speedup");
    bench_matching(40, 16, 20);
    bench_matching(80, 30, 5);
    bench_t1(40, 16, 10, 20);
    bench_conv(15, 64, 11, 40, 5);
    bench_conv(64, 32, 5, 40, 5);
    bench_conv(16, 1, 1, 80, 20);
    return 0;
}
