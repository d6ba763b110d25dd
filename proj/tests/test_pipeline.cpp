// pipeline: config plumbing, front end, stitching, history update, dataset.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spac/eval.hpp"
#include "spac/pipeline.hpp"
#include "spac/rng.hpp"

using namespace spac;

namespace {

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.n_t = 5;
    cfg.n_x = 16;
    cfg.n_s = 6;
    cfg.n_st = 10;
    cfg.sp_count = 12;
    return cfg;
}

SceneParams flat_scene(int frames) {
    SceneParams sp;
    sp.width = 48;
    sp.height = 40;
    sp.frames = frames;
    sp.amp = 0.0;       // constant luma 0.5
    sp.chroma_amp = 0.0;
    return sp;
}

SceneParams textured_scene(int frames, double vx = 0.0, double vy = 0.0) {
    SceneParams sp;
    sp.width = 48;
    sp.height = 40;
    sp.frames = frames;
    sp.vx = vx;
    sp.vy = vy;
    sp.min_wavelength = 10.0;
    sp.max_wavelength = 36.0;
    sp.seed = 400;
    return sp;
}

Plane crop(const Plane& p, int r0, int c0, int n) {
    Plane out(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) out(r, c) = p(r0 + r, c0 + c);
    return out;
}

SpPatch box_patch(const Frame& f, int box_row, int box_col, int n_x) {
    SpPatch p;
    p.box_row = box_row;
    p.box_col = box_col;
    p.n_x = n_x;
    p.x = crop(f.y, box_row, box_col, n_x);
    p.m_sp = Mask(n_x, n_x);
    p.m_sp.fill(1);
    return p;
}

bool frames_equal(const Frame& a, const Frame& b) {
    return a.y.data == b.y.data && a.cb.data == b.cb.data && a.cr.data == b.cr.data;
}

}  // namespace

TEST_CASE("config file round trip") {
    const std::string toml = R"(
[pipeline]
n_t = 7
n_x = 24
eps_rain = 0.02
t1_exclude_current_frame = true
features = "f2+f3"
model = "ck.json"

[rain]
density = 500.0
opacity_max = 0.3

[scene]
width = 96
vx = -1.5
)";
    const ConfigFile file = ConfigFile::parse(toml);
    const PipelineConfig c = config_from_file(file);
    CHECK(c.n_t == 7);
    CHECK(c.n_x == 24);
    CHECK(c.n_s == 30);  // untouched default
    CHECK(c.eps_rain == doctest::Approx(0.02));
    CHECK(c.eps_e == doctest::Approx(0.2));
    CHECK(c.t1_exclude_current_frame);
    CHECK_FALSE(c.features.f1);
    CHECK(c.features.f2);
    CHECK(c.model_path == "ck.json");

    const RainParams r = rain_from_file(file);
    CHECK(r.density == doctest::Approx(500.0));
    CHECK(r.opacity_max == doctest::Approx(0.3));
    CHECK(r.opacity_min == doctest::Approx(0.06));

    const SceneParams s = scene_from_file(file);
    CHECK(s.width == 96);
    CHECK(s.height == 180);
    CHECK(s.vx == doctest::Approx(-1.5));

    PipelineConfig base;
    base.n_x = 50;
    const PipelineConfig c2 = config_from_file(ConfigFile::parse("[pipeline]\nn_s = 8\n"), base);
    CHECK(c2.n_x == 50);  // base survives
    CHECK(c2.n_s == 8);
}

TEST_CASE("config validation") {
    PipelineConfig ok = small_config();
    CHECK_NOTHROW(ok.validate());
    PipelineConfig c = ok;
    c.n_t = 4;
    CHECK_THROWS(c.validate());
    c = ok;
    c.n_s = 7;  // odd
    CHECK_THROWS(c.validate());
    c = ok;
    c.eps_rain = 0.0;
    CHECK_THROWS(c.validate());
    c = ok;
    c.features.f1 = c.features.f2 = c.features.f3 = false;
    CHECK_THROWS(c.validate());
    c = ok;
    c.n_st = 0;
    CHECK_THROWS(c.validate());
}

TEST_CASE("front end on a flat static scene is exactly neutral") {
    const FrameSequence seq = render_scene(flat_scene(5));
    const Window w = make_window(seq, 2, 5);
    const SpPatch patch = box_patch(seq.frames[2], 10, 12, 16);
    PipelineConfig cfg = small_config();

    const FrontEndResult fe = run_front_end(w, patch, cfg);
    CHECK(count_nonzero(fe.rain.m_rain) == 0);
    CHECK(fe.diag.rain_pixels == 0);
    CHECK_FALSE(fe.diag.all_rain_fallback);
    REQUIRE(fe.stack.channels.ch == 15);
    for (double v : fe.stack.channels.data) CHECK(v == 0.0);
    for (double v : fe.stack.x_avg.data) CHECK(v == 0.5);
    for (double v : fe.f1.data) CHECK(v == 0.5);
}

TEST_CASE("front end works on a shrunken window") {
    const FrameSequence seq = render_scene(textured_scene(6));
    const Window w = make_window(seq, 0, 5);  // head: 3 frames
    REQUIRE(w.size() == 3);
    const SpPatch patch = box_patch(seq.frames[0], 8, 10, 16);
    const FrontEndResult fe = run_front_end(w, patch, small_config());
    CHECK(fe.stack.channels.ch == 15);  // padded to the full channel count
    CHECK(count_nonzero(fe.rain.m_rain) == 0);  // static scene, no rain
}

TEST_CASE("all-rain fallback still produces output") {
    // target frame brighter than the rest everywhere: every pixel votes rain
    FrameSequence seq;
    for (int i = 0; i < 5; ++i) {
        Frame f(40, 48);
        f.y.fill(i == 2 ? 0.7 : 0.2);
        seq.push_back(std::move(f));
    }
    const Window w = make_window(seq, 2, 5);
    const SpPatch patch = box_patch(seq.frames[2], 10, 12, 16);
    PipelineConfig cfg = small_config();
    // without this the matcher happily reuses the (equally bright) rest of
    // the target frame; excluding t = 0 forces clean-frame slices
    cfg.t1_exclude_current_frame = true;

    const FrontEndResult fe = run_front_end(w, patch, cfg);
    CHECK(fe.diag.all_rain_fallback);
    CHECK(count_nonzero(fe.rain.m_rain) == 16 * 16);

    const PatchResult pr = derain_patch(w, patch, nullptr, cfg);
    CHECK(pr.diag.all_rain_fallback);
    // Avg mode replaces every pixel with the slice average of clean frames
    for (double v : pr.derained.data) CHECK(v == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("averaging mode removes rain from a static patch") {
    SceneParams sp;
    sp.width = 64;
    sp.height = 52;
    sp.frames = 5;
    sp.min_wavelength = 10.0;
    sp.max_wavelength = 40.0;
    sp.seed = 900;
    const FrameSequence clean = render_scene(sp);

    RainParams rp;
    rp.density = 800.0;
    rp.opacity_min = rp.opacity_max = 0.2;
    rp.seed = 36;  // this draw puts several streaks through the patch box
    FrameSequence rainy = clean;
    rainy.frames[2] = synthesize_rain(clean.frames[2], rp, 0).frame;

    const int br = 14, bc = 18, n_x = 20;
    const SpPatch patch = box_patch(rainy.frames[2], br, bc, n_x);
    PipelineConfig cfg = small_config();
    cfg.n_x = n_x;
    cfg.n_s = 8;
    cfg.n_st = 4;  // exactly the four aligned clean slices

    const Window w = make_window(rainy, 2, 5);
    const PatchResult pr = derain_patch(w, patch, nullptr, cfg);
    CHECK(pr.diag.rain_pixels > 0);

    const Plane clean_crop = crop(clean.frames[2].y, br, bc, n_x);
    const double before = psnr(patch.x, clean_crop);
    const double after = psnr(pr.derained, clean_crop);
    CHECK(after > before + 3.0);
    // the four t != 0 slices are exact clean matches
    for (int r = 0; r < n_x; ++r)
        for (int c = 0; c < n_x; ++c)
            CHECK(pr.x_avg(r, c) == doctest::Approx(clean_crop(r, c)).epsilon(1e-12));
}

TEST_CASE("stitch reassembles the frame") {
    const FrameSequence seq = render_scene(textured_scene(1));
    const Frame& f = seq.frames[0];
    PipelineConfig cfg = small_config();
    const SuperPixelSet sps = slic_segment(f, {cfg.sp_count, cfg.compactness, cfg.slic_iterations});
    std::vector<SpPatch> patches;
    std::vector<Plane> derained;
    int trimmed = 0;
    for (int k = 0; k < sps.count; ++k) {
        patches.push_back(extract_patch(sps, f, k, cfg.n_x));
        derained.push_back(patches.back().x);  // identity
        trimmed += patches.back().trimmed;
    }
    long passed = -1;
    const Frame out = stitch(sps, patches, derained, f, &passed);
    CHECK(frames_equal(out, f));
    CHECK(passed == trimmed);

    // zeroing one SP's patch changes exactly that SP's covered pixels
    std::vector<Plane> zeroed = derained;
    zeroed[0] = Plane(cfg.n_x, cfg.n_x);
    const Frame out2 = stitch(sps, patches, zeroed, f);
    long changed = 0;
    for (int r = 0; r < f.height(); ++r)
        for (int c = 0; c < f.width(); ++c)
            if (out2.y(r, c) != f.y(r, c)) {
                CHECK(sps.labels(r, c) == 0);
                CHECK(out2.y(r, c) == 0.0);
                ++changed;
            }
    CHECK(changed == static_cast<long>(sps.sps[0].pixels.size()) - patches[0].trimmed);
    CHECK(out2.cb.data == f.cb.data);

    std::vector<Plane> short_list(derained.begin(), derained.end() - 1);
    CHECK_THROWS(stitch(sps, patches, short_list, f));
}

TEST_CASE("flat static sequences are a fixed point") {
    const FrameSequence seq = render_scene(flat_scene(6));
    PipelineConfig cfg = small_config();

    const DerainResult avg = run_derain(seq, cfg, nullptr);
    REQUIRE(avg.output.size() == 6);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(avg.output.frames[i].y.data == seq.frames[i].y.data);  // bit identical
        CHECK(avg.output.frames[i].cb.data == seq.frames[i].cb.data);
        CHECK(avg.output.frames[i].cr.data == seq.frames[i].cr.data);
        CHECK(avg.diags[i].rain_pixels == 0);
    }

    const CnnModel zero = make_model(cfg.feature_channels());
    const DerainResult cnn = run_derain(seq, cfg, &zero);
    for (std::size_t i = 0; i < seq.size(); ++i)
        for (std::size_t j = 0; j < seq.frames[i].y.data.size(); ++j)
            CHECK(cnn.output.frames[i].y.data[j] ==
                  doctest::Approx(seq.frames[i].y.data[j]).epsilon(1e-12));
}

TEST_CASE("derain changes luma only") {
    SceneParams sp = textured_scene(5, 0.8, -0.6);
    const FrameSequence clean = render_scene(sp);
    RainParams rp;
    rp.density = 600.0;
    rp.seed = 77;
    FrameSequence rainy;
    for (int i = 0; i < 5; ++i) rainy.push_back(synthesize_rain(clean.frames[i], rp, i).frame);

    const DerainResult res = run_derain(rainy, small_config(), nullptr);
    for (std::size_t i = 0; i < rainy.size(); ++i) {
        CHECK(res.output.frames[i].cb.data == rainy.frames[i].cb.data);
        CHECK(res.output.frames[i].cr.data == rainy.frames[i].cr.data);
    }
}

TEST_CASE("history update replaces past frames") {
    SceneParams sp = textured_scene(6, 1.0, 0.5);
    const FrameSequence clean = render_scene(sp);
    RainParams rp;
    rp.density = 400.0;
    rp.seed = 12;
    FrameSequence rainy;
    for (int i = 0; i < 6; ++i) rainy.push_back(synthesize_rain(clean.frames[i], rp, i).frame);
    const PipelineConfig cfg = small_config();

    const DerainResult got = run_derain(rainy, cfg, nullptr);

    FrameSequence working = rainy;
    for (std::size_t i = 0; i < rainy.size(); ++i) {
        const Window w = make_window(working, static_cast<int>(i), cfg.n_t);
        Frame out = derain_frame(w, cfg, nullptr);
        CHECK(frames_equal(got.output.frames[i], out));
        working.frames[i] = std::move(out);
        working.derained[i] = 1;
    }

    // second run, bit identical
    const DerainResult again = run_derain(rainy, cfg, nullptr);
    for (std::size_t i = 0; i < rainy.size(); ++i)
        CHECK(frames_equal(got.output.frames[i], again.output.frames[i]));
}

TEST_CASE("run_derain rejects too-short input") {
    const FrameSequence seq = render_scene(flat_scene(2));
    CHECK_THROWS(run_derain(seq, small_config(), nullptr));
}

TEST_CASE("dataset generation") {
    std::vector<FrameSequence> scenes;
    scenes.push_back(render_scene(textured_scene(7, 0.5, 0.0)));
    SceneParams sp2 = textured_scene(7, -0.5, 0.8);
    sp2.seed = 401;
    scenes.push_back(render_scene(sp2));

    DatasetGenParams gen;
    gen.frames_per_scene = 2;
    gen.seed = 55;
    RainParams rp;
    rp.density = 2000.0;
    gen.rain = {rp};
    const PipelineConfig cfg = small_config();

    const std::vector<TrainingSample> a = generate_dataset(scenes, gen, cfg);
    CHECK(a.size() >= 2 * 2 * 4);  // 2 scenes x 2 centers x at least a few SPs
    for (const TrainingSample& s : a) {
        CHECK(s.stack.channels.ch == 15);
        CHECK(s.x_hat.rows == cfg.n_x);
        CHECK(count_nonzero(s.stack.m_sp) > 0);
    }

    const std::vector<TrainingSample> b = generate_dataset(scenes, gen, cfg);
    REQUIRE(a.size() == b.size());
    CHECK(a.front().stack.channels.data == b.front().stack.channels.data);
    CHECK(a.back().x_hat.data == b.back().x_hat.data);

    DatasetGenParams gen2 = gen;
    gen2.seed = 56;
    const std::vector<TrainingSample> c = generate_dataset(scenes, gen2, cfg);
    bool differs = a.size() != c.size();  // different rain and possibly centers
    for (std::size_t i = 0; !differs && i < a.size(); ++i)
        differs = a[i].stack.channels.data != c[i].stack.channels.data;
    CHECK(differs);
}

TEST_CASE("zero-rain flat dataset has zero loss against x_avg") {
    std::vector<FrameSequence> scenes = {render_scene(flat_scene(5))};
    DatasetGenParams gen;
    gen.frames_per_scene = 1;
    RainParams rp;
    rp.density = 0.0;
    gen.rain = {rp};
    const PipelineConfig cfg = small_config();

    const std::vector<TrainingSample> data = generate_dataset(scenes, gen, cfg);
    REQUIRE(!data.empty());
    const CnnModel zero = make_model(15);
    for (const TrainingSample& s : data) CHECK(sample_loss(zero, s) == 0.0);
}

TEST_CASE("dataset skips short scenes") {
    std::vector<FrameSequence> scenes = {render_scene(textured_scene(4))};  // < n_t
    DatasetGenParams gen;
    CHECK_THROWS_WITH_AS(generate_dataset(scenes, gen, small_config()),
                         "no usable scenes in dataset generation", std::runtime_error);

    scenes.push_back(render_scene(textured_scene(6)));
    const std::vector<TrainingSample> got = generate_dataset(scenes, gen, small_config());
    CHECK(!got.empty());
}
