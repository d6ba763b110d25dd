#include "spac/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "spac/rng.hpp"

namespace spac {

void PipelineConfig::validate() const {
    if (n_t < 3 || n_t % 2 == 0) throw std::invalid_argument("n_t must be odd and >= 3");
    if (n_x <= 0) throw std::invalid_argument("n_x must be > 0");
    if (n_s < 2 || n_s % 2 != 0) throw std::invalid_argument("n_s must be even and >= 2");
    if (n_st < 1) throw std::invalid_argument("n_st must be >= 1");
    if (sp_count < 1) throw std::invalid_argument("sp_count must be >= 1");
    if (eps_rain <= 0 || eps_e <= 0) throw std::invalid_argument("thresholds must be > 0");
    if (vote_threshold < 1) throw std::invalid_argument("vote threshold must be >= 1");
    if (slic_iterations < 1) throw std::invalid_argument("slic iterations must be >= 1");
    if (feature_channels() < 1) throw std::invalid_argument("no feature channels selected");
}

PipelineConfig config_from_file(const ConfigFile& file, PipelineConfig base) {
    PipelineConfig c = base;
    c.n_t = static_cast<int>(file.get_int("pipeline.n_t", c.n_t));
    c.n_x = static_cast<int>(file.get_int("pipeline.n_x", c.n_x));
    c.n_s = static_cast<int>(file.get_int("pipeline.n_s", c.n_s));
    c.n_st = static_cast<int>(file.get_int("pipeline.n_st", c.n_st));
    c.sp_count = static_cast<int>(file.get_int("pipeline.sp_count", c.sp_count));
    c.eps_rain = file.get_double("pipeline.eps_rain", c.eps_rain);
    c.eps_e = file.get_double("pipeline.eps_e", c.eps_e);
    c.vote_threshold = static_cast<int>(file.get_int("pipeline.vote_threshold", c.vote_threshold));
    c.compactness = file.get_double("pipeline.compactness", c.compactness);
    c.slic_iterations = static_cast<int>(file.get_int("pipeline.slic_iterations", c.slic_iterations));
    c.t1_exclude_current_frame =
        file.get_bool("pipeline.t1_exclude_current_frame", c.t1_exclude_current_frame);
    c.features = parse_feature_tag(file.get_string("pipeline.features", feature_tag(c.features)));
    c.model_path = file.get_string("pipeline.model", c.model_path);
    c.seed = static_cast<std::uint64_t>(file.get_int("pipeline.seed", static_cast<long>(c.seed)));
    return c;
}

RainParams rain_from_file(const ConfigFile& file, RainParams base) {
    RainParams r = base;
    r.density = file.get_double("rain.density", r.density);
    r.length_min = file.get_double("rain.length_min", r.length_min);
    r.length_max = file.get_double("rain.length_max", r.length_max);
    r.width_min = file.get_double("rain.width_min", r.width_min);
    r.width_max = file.get_double("rain.width_max", r.width_max);
    r.angle_mean_deg = file.get_double("rain.angle_mean", r.angle_mean_deg);
    r.angle_jitter_deg = file.get_double("rain.angle_jitter", r.angle_jitter_deg);
    r.opacity_min = file.get_double("rain.opacity_min", r.opacity_min);
    r.opacity_max = file.get_double("rain.opacity_max", r.opacity_max);
    r.blur_samples = static_cast<int>(file.get_int("rain.blur_samples", r.blur_samples));
    r.fall_speed = file.get_double("rain.fall_speed", r.fall_speed);
    r.eps_gt = file.get_double("rain.eps_gt", r.eps_gt);
    return r;
}

SceneParams scene_from_file(const ConfigFile& file, SceneParams base) {
    SceneParams s = base;
    s.width = static_cast<int>(file.get_int("scene.width", s.width));
    s.height = static_cast<int>(file.get_int("scene.height", s.height));
    s.frames = static_cast<int>(file.get_int("scene.frames", s.frames));
    s.vx = file.get_double("scene.vx", s.vx);
    s.vy = file.get_double("scene.vy", s.vy);
    s.harmonics = static_cast<int>(file.get_int("scene.harmonics", s.harmonics));
    s.base = file.get_double("scene.base", s.base);
    s.amp = file.get_double("scene.amp", s.amp);
    s.min_wavelength = file.get_double("scene.min_wavelength", s.min_wavelength);
    s.max_wavelength = file.get_double("scene.max_wavelength", s.max_wavelength);
    s.chroma_amp = file.get_double("scene.chroma_amp", s.chroma_amp);
    s.chroma_wavelength = file.get_double("scene.chroma_wavelength", s.chroma_wavelength);
    return s;
}

namespace {

Mask rain_free_template(const Mask& m_sp, const Mask& m_rain) {
    Mask out(m_sp.rows, m_sp.cols);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (m_sp.data[i] && !m_rain.data[i]) ? 1 : 0;
    return out;
}

Plane crop_plane(const Plane& p, int r0, int c0, int n) {
    Plane out(n, n);
    for (int r = 0; r < n; ++r) std::copy(p.row(r0 + r) + c0, p.row(r0 + r) + c0 + n, out.row(r));
    return out;
}

const Frame& window_target(const Window& window) {
    for (const WindowFrame& wf : window)
        if (wf.t == 0) return *wf.frame;
    throw std::logic_error("window lacks the target frame");
}

}  // namespace

FrontEndResult run_front_end(const Window& window, const SpPatch& patch,
                             const PipelineConfig& cfg) {
    FrontEndResult out;
    out.diag.trimmed_pixels = patch.trimmed;

    const SearchBuffer buffer = build_buffer(window, patch, cfg.n_s);
    const SpacTensor t0 = build_t0(patch, buffer);

    const int vt =
        scaled_vote_threshold(static_cast<int>(window.size()), cfg.n_t, cfg.vote_threshold);
    out.rain = compute_rain_mask(patch, t0, window_target(window), cfg.eps_rain, cfg.eps_e, vt);
    out.diag.rain_pixels = count_nonzero(out.rain.m_rain);

    Mask m_rsp = rain_free_template(patch.m_sp, out.rain.m_rain);
    if (count_nonzero(m_rsp) == 0) {
        // every SP pixel voted rain: fall back to matching with the plain
        // SP template so the patch still gets a T1 stack
        m_rsp = patch.m_sp;
        out.diag.all_rain_fallback = true;
    }
    const SpacTensor t1 =
        build_t1(patch, buffer, m_rsp, cfg.n_st, cfg.t1_exclude_current_frame);

    Plane x_avg = slice_average(t1);
    out.f1 = occluded_background(patch.x, x_avg, out.rain.m_rain);
    out.stack = normalize_stack(out.f1, temporal_feature(t0, cfg.n_t), detail_feature(t1), x_avg,
                                patch.m_sp);
    return out;
}

PatchResult derain_patch(const Window& window, const SpPatch& patch, const CnnModel* model,
                         const PipelineConfig& cfg) {
    FrontEndResult fe = run_front_end(window, patch, cfg);
    PatchResult res;
    res.x_avg = fe.stack.x_avg;
    res.m_rain = fe.rain.m_rain;
    res.diag = fe.diag;
    if (!model) {
        res.derained = std::move(fe.f1);  // averaging mode
    } else {
        FeatureStack stack = cfg.features.full()
                                 ? std::move(fe.stack)
                                 : select_features(fe.stack, cfg.features, cfg.n_t, cfg.n_st);
        const Plane detail = forward(*model, stack);
        res.derained = Plane(patch.n_x, patch.n_x);
        for (int r = 0; r < patch.n_x; ++r)
            for (int c = 0; c < patch.n_x; ++c)
                res.derained(r, c) = clamp01(res.x_avg(r, c) + detail(r, c));
    }
    // outside the mask the patch is not this SP's responsibility
    for (int r = 0; r < patch.n_x; ++r)
        for (int c = 0; c < patch.n_x; ++c)
            if (!patch.m_sp(r, c)) res.derained(r, c) = patch.x(r, c);
    return res;
}

Frame stitch(const SuperPixelSet& sps, const std::vector<SpPatch>& patches,
             const std::vector<Plane>& derained, const Frame& input, long* passthrough) {
    if (patches.size() != static_cast<std::size_t>(sps.count) || derained.size() != patches.size())
        throw std::invalid_argument("stitch: one patch per superpixel required");
    const int h = input.height(), w = input.width();
    Frame out = input;  // chroma passes through untouched
    Image<std::uint8_t> written(h, w, 0);
    long passed = 0;
    for (int k = 0; k < sps.count; ++k) {
        const SpPatch& patch = patches[k];
        const Plane& d = derained[k];
        if (d.rows != patch.n_x || d.cols != patch.n_x)
            throw std::invalid_argument("stitch: patch shape mismatch");
        for (int packed : sps.sps[k].pixels) {
            const int r = packed / w, c = packed % w;
            if (written(r, c)) throw std::runtime_error("stitch: pixel written twice");
            written(r, c) = 1;
            const int pr = r - patch.box_row, pc = c - patch.box_col;
            if (pr >= 0 && pr < patch.n_x && pc >= 0 && pc < patch.n_x && patch.m_sp(pr, pc)) {
                out.y(r, c) = d(pr, pc);
            } else {
                ++passed;  // trimmed out of the box; keep the input value
            }
        }
    }
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (!written(r, c))
                throw std::runtime_error("stitch: uncovered pixel at " + std::to_string(r) + "," +
                                         std::to_string(c));
    if (passthrough) *passthrough = passed;
    return out;
}

Frame derain_frame(const Window& window, const PipelineConfig& cfg, const CnnModel* model,
                   FrameDiagnostics* diag) {
    cfg.validate();
    const Frame& target = window_target(window);
    const SuperPixelSet sps =
        slic_segment(target, {cfg.sp_count, cfg.compactness, cfg.slic_iterations});

    std::vector<SpPatch> patches;
    std::vector<Plane> results;
    patches.reserve(sps.count);
    results.reserve(sps.count);
    FrameDiagnostics fd;
    for (int k = 0; k < sps.count; ++k) {
        patches.push_back(extract_patch(sps, target, k, cfg.n_x));
        PatchResult pr = derain_patch(window, patches.back(), model, cfg);
        fd.rain_pixels += pr.diag.rain_pixels;
        fd.all_rain_fallbacks += pr.diag.all_rain_fallback ? 1 : 0;
        results.push_back(std::move(pr.derained));
    }
    Frame out = stitch(sps, patches, results, target, &fd.passthrough_pixels);
    if (diag) *diag = fd;
    return out;
}

DerainResult run_derain(const FrameSequence& input, const PipelineConfig& cfg,
                        const CnnModel* model) {
    cfg.validate();
    if (static_cast<int>(input.size()) < (cfg.n_t + 1) / 2)
        throw std::invalid_argument("sequence too short for the window");
    DerainResult res;
    FrameSequence working = input;  // past slots get replaced by derained output
    for (std::size_t i = 0; i < input.size(); ++i) {
        const Window window = make_window(working, static_cast<int>(i), cfg.n_t);
        FrameDiagnostics fd;
        Frame out = derain_frame(window, cfg, model, &fd);
        working.frames[i] = out;
        working.derained[i] = 1;
        res.output.push_back(std::move(out));
        res.diags.push_back(fd);
    }
    return res;
}

std::vector<TrainingSample> generate_dataset(const std::vector<FrameSequence>& clean_scenes,
                                             const DatasetGenParams& gen,
                                             const PipelineConfig& cfg) {
    cfg.validate();
    if (clean_scenes.empty()) throw std::invalid_argument("empty scene list");
    if (gen.frames_per_scene < 1) throw std::invalid_argument("frames_per_scene must be >= 1");

    std::vector<TrainingSample> samples;
    const int half = (cfg.n_t - 1) / 2;
    for (std::size_t s = 0; s < clean_scenes.size(); ++s) {
        const FrameSequence& clean = clean_scenes[s];
        const int n = static_cast<int>(clean.size());
        if (n < cfg.n_t) {
            std::cerr << "warning: scene " << s << " has " << n
                      << " frames, shorter than the window; skipped\n";
            continue;
        }
        RainParams rp = gen.rain.empty() ? RainParams{} : gen.rain[s % gen.rain.size()];
        rp.seed = rng::mix(gen.seed, 0x1000 + s);

        FrameSequence rainy;
        for (int i = 0; i < n; ++i)
            rainy.push_back(synthesize_rain(clean.frames[i], rp, i).frame);

        std::vector<int> centers(n - 2 * half);
        std::iota(centers.begin(), centers.end(), half);
        rng::Engine eng(rng::mix(gen.seed, 0x2000 + s));
        rng::shuffle(centers, eng);
        centers.resize(std::min<std::size_t>(centers.size(), gen.frames_per_scene));
        std::sort(centers.begin(), centers.end());

        for (int center : centers) {
            const Window window = make_window(rainy, center, cfg.n_t);
            const Frame& target = rainy.frames[center];
            const SuperPixelSet sps =
                slic_segment(target, {cfg.sp_count, cfg.compactness, cfg.slic_iterations});
            for (int k = 0; k < sps.count; ++k) {
                SpPatch patch = extract_patch(sps, target, k, cfg.n_x);
                FrontEndResult fe = run_front_end(window, patch, cfg);
                TrainingSample ts;
                ts.stack = std::move(fe.stack);
                ts.x_hat = crop_plane(clean.frames[center].y, patch.box_row, patch.box_col,
                                      cfg.n_x);
                samples.push_back(std::move(ts));
            }
        }
    }
    if (samples.empty()) throw std::runtime_error("no usable scenes in dataset generation");
    return samples;
}

}  // namespace spac
