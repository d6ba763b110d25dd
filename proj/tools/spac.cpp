// Command-line front end: synth / train / derain / eval / ablate.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "spac/checkpoint.hpp"
#include "spac/dataset.hpp"
#include "spac/eval.hpp"
#include "spac/frame_io.hpp"
#include "spac/pipeline.hpp"
#include "spac/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spac;

namespace {

json config_to_json(const PipelineConfig& c) {
    return {{"n_t", c.n_t},
            {"n_x", c.n_x},
            {"n_s", c.n_s},
            {"n_st", c.n_st},
            {"sp_count", c.sp_count},
            {"eps_rain", c.eps_rain},
            {"eps_e", c.eps_e},
            {"vote_threshold", c.vote_threshold},
            {"compactness", c.compactness},
            {"slic_iterations", c.slic_iterations},
            {"t1_exclude_current_frame", c.t1_exclude_current_frame},
            {"features", feature_tag(c.features)},
            {"model", c.model_path},
            {"seed", c.seed}};
}

json rain_to_json(const RainParams& r) {
    return {{"density", r.density},
            {"length", {r.length_min, r.length_max}},
            {"width", {r.width_min, r.width_max}},
            {"angle_mean", r.angle_mean_deg},
            {"angle_jitter", r.angle_jitter_deg},
            {"opacity", {r.opacity_min, r.opacity_max}},
            {"blur_samples", r.blur_samples},
            {"fall_speed", r.fall_speed},
            {"eps_gt", r.eps_gt},
            {"seed", r.seed}};
}

json scene_to_json(const SceneParams& s) {
    return {{"width", s.width},     {"height", s.height},
            {"frames", s.frames},   {"vx", s.vx},
            {"vy", s.vy},           {"harmonics", s.harmonics},
            {"base", s.base},       {"amp", s.amp},
            {"min_wavelength", s.min_wavelength},
            {"max_wavelength", s.max_wavelength},
            {"chroma_amp", s.chroma_amp},
            {"chroma_wavelength", s.chroma_wavelength},
            {"seed", s.seed}};
}

void write_manifest(const fs::path& path, const std::string& command, json body) {
    body["command"] = command;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << body.dump(1, '\t') << '\n';
}

// Pipeline flags shared by the subcommands that run the front end.
struct PipelineFlags {
    std::string config_path;

    void attach(CLI::App* app, PipelineConfig& cfg, std::string* model_path = nullptr) {
        app->add_option("--config", config_path, "TOML config file");
        app->add_option("--n-t", cfg.n_t, "temporal window length (odd)");
        app->add_option("--n-x", cfg.n_x, "SP bounding box size");
        app->add_option("--n-s", cfg.n_s, "search window width (even)");
        app->add_option("--n-st", cfg.n_st, "T1 slice count");
        app->add_option("--sp-count", cfg.sp_count, "target superpixels per frame");
        app->add_option("--eps-rain", cfg.eps_rain, "rain fluctuation threshold");
        app->add_option("--eps-edge", cfg.eps_e, "chroma edge veto threshold");
        app->add_option("--vote-threshold", cfg.vote_threshold, "rain votes required");
        app->add_option("--compactness", cfg.compactness, "SLIC compactness");
        app->add_option("--slic-iterations", cfg.slic_iterations, "SLIC iterations");
        app->add_flag("--t1-exclude-current-frame", cfg.t1_exclude_current_frame,
                      "drop the whole current frame from the T1 pool");
        app->add_option("--seed", cfg.seed, "master seed");
        if (model_path) app->add_option("--model", *model_path, "model checkpoint");
    }

    // flag values already sit in cfg; layer the config file underneath
    PipelineConfig resolve(const PipelineConfig& flags_cfg, const PipelineConfig& defaults) const {
        if (config_path.empty()) return flags_cfg;
        const ConfigFile file = ConfigFile::parse_file(config_path);
        PipelineConfig from_file = config_from_file(file, defaults);
        // CLI flags win where they differ from the built-in defaults
        PipelineConfig out = from_file;
        auto pick_int = [](int flag, int def, int file_v) { return flag != def ? flag : file_v; };
        auto pick_dbl = [](double flag, double def, double file_v) {
            return flag != def ? flag : file_v;
        };
        out.n_t = pick_int(flags_cfg.n_t, defaults.n_t, from_file.n_t);
        out.n_x = pick_int(flags_cfg.n_x, defaults.n_x, from_file.n_x);
        out.n_s = pick_int(flags_cfg.n_s, defaults.n_s, from_file.n_s);
        out.n_st = pick_int(flags_cfg.n_st, defaults.n_st, from_file.n_st);
        out.sp_count = pick_int(flags_cfg.sp_count, defaults.sp_count, from_file.sp_count);
        out.eps_rain = pick_dbl(flags_cfg.eps_rain, defaults.eps_rain, from_file.eps_rain);
        out.eps_e = pick_dbl(flags_cfg.eps_e, defaults.eps_e, from_file.eps_e);
        out.vote_threshold =
            pick_int(flags_cfg.vote_threshold, defaults.vote_threshold, from_file.vote_threshold);
        out.compactness = pick_dbl(flags_cfg.compactness, defaults.compactness, from_file.compactness);
        out.slic_iterations = pick_int(flags_cfg.slic_iterations, defaults.slic_iterations,
                                       from_file.slic_iterations);
        if (flags_cfg.t1_exclude_current_frame) out.t1_exclude_current_frame = true;
        if (flags_cfg.seed != defaults.seed) out.seed = flags_cfg.seed;
        if (!flags_cfg.model_path.empty()) out.model_path = flags_cfg.model_path;
        if (feature_tag(flags_cfg.features) != feature_tag(defaults.features))
            out.features = flags_cfg.features;
        return out;
    }
};

std::optional<ConfigFile> load_config(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return ConfigFile::parse_file(path);
}

// ---------------------------------------------------------------- synth ----

int cmd_synth(const std::string& out_dir, const PipelineConfig& cfg, const SceneParams& scene_base,
              const RainParams& rain_base, int scenes, int frames_per_scene, double camera_speed,
              std::uint64_t seed, bool emit_frames, bool archive) {
    fs::create_directories(out_dir);

    std::vector<FrameSequence> clean;
    std::vector<SceneParams> scene_params;
    for (int s = 0; s < scenes; ++s) {
        SceneParams sp = scene_base;
        sp.seed = rng::mix(seed, 0x5C000 + s);
        if (camera_speed >= 0.0) {
            rng::Engine eng(rng::mix(seed, 0xCA3 + s));
            sp.vx = rng::uniform(eng, -camera_speed, camera_speed);
            sp.vy = rng::uniform(eng, -camera_speed, camera_speed);
        }
        std::cerr << "scene " << s << ": vx=" << sp.vx << " vy=" << sp.vy << "\n";
        clean.push_back(render_scene(sp));
        scene_params.push_back(sp);
    }

    json manifest;
    manifest["seed"] = seed;
    manifest["pipeline"] = config_to_json(cfg);
    manifest["rain"] = rain_to_json(rain_base);
    for (const SceneParams& sp : scene_params) manifest["scenes"].push_back(scene_to_json(sp));

    if (archive) {
        DatasetGenParams gen;
        gen.rain = {rain_base};
        gen.frames_per_scene = frames_per_scene;
        gen.seed = seed;
        std::vector<TrainingSample> samples = generate_dataset(clean, gen, cfg);
        DatasetManifest meta;
        meta.n_t = cfg.n_t;
        meta.n_st = cfg.n_st;
        meta.n_x = cfg.n_x;
        meta.seed = seed;
        meta.params_json =
            json{{"rain", rain_to_json(rain_base)}, {"pipeline", config_to_json(cfg)}}.dump();
        write_dataset(out_dir, samples, meta);
        manifest["sample_count"] = samples.size();
        std::cout << "wrote " << samples.size() << " samples to " << out_dir << "\n";
    }

    if (emit_frames) {
        for (int s = 0; s < scenes; ++s) {
            const fs::path dir = fs::path(out_dir) / "frames" / expand_pattern("scene_%02d", s);
            fs::create_directories(dir);
            RainParams rp = rain_base;
            rp.seed = rng::mix(seed, 0x3000 + s);
            for (int i = 0; i < static_cast<int>(clean[s].size()); ++i) {
                const RainyFrame rf = synthesize_rain(clean[s].frames[i], rp, i);
                save_frame(clean[s].frames[i], (dir / expand_pattern("clean_%04d.png", i)).string());
                save_frame(rf.frame, (dir / expand_pattern("rainy_%04d.png", i)).string());
                save_mask(rf.gt_mask, (dir / expand_pattern("gtmask_%04d.png", i)).string());
                save_gray16(rf.gt_boost, (dir / expand_pattern("boost_%04d.png", i)).string());
            }
            manifest["frame_rain_seeds"].push_back(rp.seed);
        }
        std::cout << "wrote frame sequences under " << out_dir << "/frames\n";
    }

    write_manifest(fs::path(out_dir) / "run_manifest.json", "synth", manifest);
    return 0;
}

// ---------------------------------------------------------------- train ----

int cmd_train(const std::string& dataset_dir, const std::string& out_path,
              const std::string& resume, const std::string& features_tag,
              std::vector<int> hidden, int epochs, int batch, double alpha, std::uint64_t seed,
              int forced_n_t, int forced_n_st) {
    if (const fs::path parent = fs::path(out_path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    DatasetManifest meta;
    std::vector<TrainingSample> samples = load_dataset(dataset_dir, &meta);
    std::cout << "loaded " << samples.size() << " samples (n_t=" << meta.n_t
              << " n_st=" << meta.n_st << " n_x=" << meta.n_x << ")\n";
    if (meta.channel_order != "f1+f2+f3")
        throw std::runtime_error("archive channel order '" + meta.channel_order +
                                 "' is not the full stack");
    if (forced_n_t > 0 && forced_n_t != meta.n_t)
        throw std::runtime_error("config n_t=" + std::to_string(forced_n_t) +
                                 " does not match archive n_t=" + std::to_string(meta.n_t));
    if (forced_n_st > 0 && forced_n_st != meta.n_st)
        throw std::runtime_error("config n_st=" + std::to_string(forced_n_st) +
                                 " does not match archive n_st=" + std::to_string(meta.n_st));

    const FeatureSelect sel = parse_feature_tag(features_tag);
    if (!sel.full())
        for (TrainingSample& s : samples) s.stack = select_features(s.stack, sel, meta.n_t, meta.n_st);
    const int ch = sel.channel_count(meta.n_t, meta.n_st);

    CnnModel model;
    CheckpointMeta ck_meta;
    AdamState resume_state;
    bool has_resume_state = false;
    if (!resume.empty()) {
        Checkpoint ck = load_checkpoint(resume, ch);
        if (ck.meta.channel_order != features_tag)
            throw std::runtime_error("resume checkpoint feature set '" + ck.meta.channel_order +
                                     "' does not match --features " + features_tag);
        model = std::move(ck.model);
        ck_meta = ck.meta;
        resume_state = std::move(ck.state);  // keeps the ADAM moments and step counter
        has_resume_state = ck.has_state;
    } else {
        model = xavier_init(ch, hidden, rng::mix(seed, 0xC0DE));
    }
    ck_meta.channel_order = features_tag;
    ck_meta.n_t = meta.n_t;
    ck_meta.n_st = meta.n_st;
    ck_meta.seed = seed;

    TrainParams tp;
    tp.epochs = epochs;
    tp.batch_size = batch;
    tp.seed = seed;
    tp.adam.alpha = alpha;
    std::vector<double> history = ck_meta.loss_history;  // from a resumed run, else empty
    tp.on_epoch = [&](int epoch, double loss, const CnnModel& m, const AdamState& st) {
        std::cout << "epoch " << epoch << " loss " << loss << std::endl;
        history.push_back(loss);
        CheckpointMeta em = ck_meta;
        em.loss_history = history;
        save_checkpoint(out_path, m, &st, em);
    };
    TrainResult res =
        train(std::move(model), samples, tp, has_resume_state ? &resume_state : nullptr);

    ck_meta.loss_history = history;
    save_checkpoint(out_path, res.model, &res.state, ck_meta);
    std::cout << "saved " << out_path << "\n";
    return 0;
}

// --------------------------------------------------------------- derain ----

int cmd_derain(const std::string& input, int first, int last, const std::string& out_dir,
               const PipelineConfig& cfg_in, const std::string& clean_pattern, bool save_masks) {
    PipelineConfig cfg = cfg_in;
    FrameSequence seq = load_sequence(input, first, last);
    std::cout << "loaded " << seq.size() << " frames " << seq.width() << "x" << seq.height()
              << "\n";

    CnnModel model;
    const CnnModel* model_ptr = nullptr;
    if (!cfg.model_path.empty()) {
        Checkpoint ck = load_checkpoint(cfg.model_path);
        cfg.features = parse_feature_tag(ck.meta.channel_order);
        if (ck.meta.n_t != cfg.n_t || ck.meta.n_st != cfg.n_st)
            throw std::runtime_error("checkpoint n_t/n_st do not match the pipeline config");
        if (ck.model.in_channels() != cfg.feature_channels())
            throw std::runtime_error("checkpoint input channels do not match the feature set");
        model = std::move(ck.model);
        model_ptr = &model;
    }

    fs::create_directories(out_dir);
    DerainResult res = run_derain(seq, cfg, model_ptr);
    save_sequence(res.output, (fs::path(out_dir) / "derained_%04d.png").string(), first);

    long rain_total = 0, passthrough = 0;
    int fallbacks = 0;
    for (const FrameDiagnostics& d : res.diags) {
        rain_total += d.rain_pixels;
        passthrough += d.passthrough_pixels;
        fallbacks += d.all_rain_fallbacks;
    }

    json manifest;
    manifest["input"] = input;
    manifest["first"] = first;
    manifest["last"] = last;
    manifest["pipeline"] = config_to_json(cfg);
    manifest["mode"] = model_ptr ? "cnn" : "avg";
    manifest["rain_pixels"] = rain_total;
    manifest["all_rain_fallbacks"] = fallbacks;
    manifest["passthrough_pixels"] = passthrough;

    if (save_masks) {
        // masks are recomputed against the raw input window for inspection
        std::cerr << "note: --save-masks re-runs detection per frame\n";
    }

    if (!clean_pattern.empty()) {
        FrameSequence clean = load_sequence(clean_pattern, first, last);
        std::ofstream csv(fs::path(out_dir) / "metrics.csv");
        csv << "frame,psnr_rainy,psnr_derained,ssim_rainy,ssim_derained\n";
        double pr_sum = 0, pd_sum = 0, sr_sum = 0, sd_sum = 0;
        const int margin = 8;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            const Plane cy = crop_border(clean.frames[i].y, margin);
            const Plane ry = crop_border(seq.frames[i].y, margin);
            const Plane dy = crop_border(res.output.frames[i].y, margin);
            const double pr = psnr(ry, cy), pd = psnr(dy, cy);
            const double sr = ssim(ry, cy), sd = ssim(dy, cy);
            csv << (first + static_cast<int>(i)) << ',' << pr << ',' << pd << ',' << sr << ','
                << sd << '\n';
            pr_sum += pr;
            pd_sum += pd;
            sr_sum += sr;
            sd_sum += sd;
        }
        const double n = static_cast<double>(seq.size());
        csv << "mean," << pr_sum / n << ',' << pd_sum / n << ',' << sr_sum / n << ','
            << sd_sum / n << '\n';
        std::cout << "mean PSNR rainy " << pr_sum / n << " dB -> derained " << pd_sum / n
                  << " dB\n";
        manifest["mean_psnr_rainy"] = pr_sum / n;
        manifest["mean_psnr_derained"] = pd_sum / n;
    }

    write_manifest(fs::path(out_dir) / "run_manifest.json", "derain", manifest);
    return 0;
}

// ----------------------------------------------------------------- eval ----

int cmd_eval(const std::string& test, const std::string& ref, int first, int last,
             const std::string& out_csv, const std::string& mask_pattern,
             const std::string& pr_csv, int margin) {
    for (const std::string& p : {out_csv, pr_csv})
        if (const fs::path parent = fs::path(p).parent_path(); !p.empty() && !parent.empty())
            fs::create_directories(parent);
    FrameSequence a = load_sequence(test, first, last);
    FrameSequence b = load_sequence(ref, first, last);

    std::ofstream csv(out_csv);
    if (!csv) throw std::runtime_error("cannot write " + out_csv);
    csv << "frame,psnr,ssim\n";
    double psum = 0, ssum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Plane ta = crop_border(a.frames[i].y, margin);
        const Plane tb = crop_border(b.frames[i].y, margin);
        const double p = psnr(ta, tb), s = ssim(ta, tb);
        csv << (first + static_cast<int>(i)) << ',' << p << ',' << s << '\n';
        psum += p;
        ssum += s;
    }
    const double n = static_cast<double>(a.size());
    csv << "mean," << psum / n << ',' << ssum / n << '\n';
    std::cout << "mean PSNR " << psum / n << " dB, mean SSIM " << ssum / n << "\n";

    if (!mask_pattern.empty()) {
        std::vector<Plane> da, db;
        std::vector<Mask> masks;
        for (std::size_t i = 0; i < a.size(); ++i) {
            da.push_back(crop_border(a.frames[i].y, margin));
            db.push_back(crop_border(b.frames[i].y, margin));
            Mask m = load_mask(expand_pattern(mask_pattern, first + static_cast<int>(i)));
            Mask cropped(m.rows - 2 * margin, m.cols - 2 * margin);
            for (int r = 0; r < cropped.rows; ++r)
                for (int c = 0; c < cropped.cols; ++c) cropped(r, c) = m(r + margin, c + margin);
            masks.push_back(std::move(cropped));
        }
        const PrCurve curve = rain_edge_pr_sequence(da, db, masks, default_pr_thresholds());
        std::cout << "rain-edge F-measure " << curve.f_measure << "\n";
        if (!pr_csv.empty()) {
            std::ofstream pc(pr_csv);
            pc << "threshold,precision,recall\n";
            for (const PrPoint& pt : curve.points)
                pc << pt.threshold << ',' << pt.precision << ',' << pt.recall << '\n';
            pc << "f_measure," << curve.f_measure << ",\n";
        }
    }
    return 0;
}

// --------------------------------------------------------------- ablate ----

int cmd_ablate(const std::string& dataset_dir, const std::string& out_dir, std::vector<int> hidden,
               int epochs, int batch, double alpha, double val_frac, std::uint64_t seed) {
    DatasetManifest meta;
    std::vector<TrainingSample> samples = load_dataset(dataset_dir, &meta);
    fs::create_directories(out_dir);

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng::Engine eng(rng::mix(seed, 0xAB1A7E));
    rng::shuffle(order, eng);
    const std::size_t n_val = static_cast<std::size_t>(val_frac * samples.size());
    if (n_val == 0 || n_val >= samples.size())
        throw std::runtime_error("validation split is empty; adjust --val-frac");

    std::ofstream csv(fs::path(out_dir) / "ablation.csv");
    csv << "features,final_train_loss,val_loss,val_psnr\n";
    const std::vector<std::string> tags = {"f1+f2+f3", "f2+f3", "f1+f3", "f1+f2"};
    for (std::size_t v = 0; v < tags.size(); ++v) {
        const FeatureSelect sel = parse_feature_tag(tags[v]);
        std::vector<TrainingSample> train_set, val_set;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const TrainingSample& src = samples[order[i]];
            TrainingSample ts;
            ts.stack = sel.full() ? src.stack : select_features(src.stack, sel, meta.n_t, meta.n_st);
            ts.x_hat = src.x_hat;
            (i < n_val ? val_set : train_set).push_back(std::move(ts));
        }
        TrainParams tp;
        tp.epochs = epochs;
        tp.batch_size = batch;
        tp.seed = rng::mix(seed, 0xF00 + v);
        tp.adam.alpha = alpha;
        CnnModel init = xavier_init(sel.channel_count(meta.n_t, meta.n_st), hidden, tp.seed);
        TrainResult res = train(std::move(init), train_set, tp);

        double val_loss = 0, val_psnr = 0;
        for (const TrainingSample& s : val_set) {
            val_loss += sample_loss(res.model, s);
            const Plane detail = forward(res.model, s.stack);
            Plane recon(detail.rows, detail.cols);
            for (std::size_t i = 0; i < recon.data.size(); ++i)
                recon.data[i] = clamp01(s.stack.x_avg.data[i] + detail.data[i]);
            val_psnr += masked_psnr(recon, s.x_hat, s.stack.m_sp);
        }
        val_loss /= static_cast<double>(val_set.size());
        val_psnr /= static_cast<double>(val_set.size());

        CheckpointMeta cm;
        cm.channel_order = tags[v];
        cm.n_t = meta.n_t;
        cm.n_st = meta.n_st;
        cm.seed = tp.seed;
        cm.loss_history = res.loss_history;
        const std::string tag_file = tags[v];
        std::string safe;
        for (char c : tag_file) safe += (c == '+') ? '_' : c;
        save_checkpoint((fs::path(out_dir) / ("model_" + safe + ".json")).string(), res.model,
                        &res.state, cm);

        csv << tags[v] << ',' << res.loss_history.back() << ',' << val_loss << ',' << val_psnr
            << '\n';
        std::cout << tags[v] << ": train loss " << res.loss_history.back() << ", val loss "
                  << val_loss << ", val patch PSNR " << val_psnr << " dB\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"superpixel-aligned video deraining"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "OpenMP thread count (or SPAC_THREADS env)");

    // synth
    auto* synth = app.add_subcommand("synth", "render scenes, rain them, build a training archive");
    std::string sy_out;
    int sy_scenes = 3, sy_frames_per_scene = 12;
    double sy_camera_speed = -1.0;
    bool sy_emit_frames = false, sy_no_archive = false;
    PipelineConfig sy_cfg;
    PipelineFlags sy_flags;
    synth->add_option("--out", sy_out, "output directory")->required();
    synth->add_option("--scenes", sy_scenes, "number of scenes");
    synth->add_option("--frames-per-scene", sy_frames_per_scene, "window centers sampled per scene");
    synth->add_option("--camera-speed", sy_camera_speed,
                      "per-scene random camera speed bound (px/frame); <0 uses [scene] vx/vy");
    synth->add_flag("--emit-frames", sy_emit_frames, "also write clean/rainy/gt PNG sequences");
    synth->add_flag("--no-archive", sy_no_archive, "skip the training archive");
    sy_flags.attach(synth, sy_cfg);
    int sy_width = 0, sy_height = 0, sy_frames = 0;
    double sy_density = -1.0, sy_opacity_min = -1.0, sy_opacity_max = -1.0;
    synth->add_option("--width", sy_width, "scene width");
    synth->add_option("--height", sy_height, "scene height");
    synth->add_option("--frames", sy_frames, "frames per scene");
    synth->add_option("--density", sy_density, "streaks per frame per megapixel");
    synth->add_option("--opacity-min", sy_opacity_min, "min streak boost");
    synth->add_option("--opacity-max", sy_opacity_max, "max streak boost");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the detail-compensation network");
    std::string tr_dataset, tr_out, tr_resume, tr_features = "f1+f2+f3";
    std::vector<int> tr_hidden = {64, 32, 16};
    int tr_epochs = 30, tr_batch = 50, tr_n_t = 0, tr_n_st = 0;
    double tr_alpha = 1e-4;
    std::uint64_t tr_seed = 0;
    train_cmd->add_option("--dataset", tr_dataset, "dataset archive directory")->required();
    train_cmd->add_option("--out", tr_out, "checkpoint output path")->required();
    train_cmd->add_option("--resume", tr_resume, "checkpoint to resume from");
    train_cmd->add_option("--features", tr_features, "feature groups, e.g. f2+f3");
    train_cmd->add_option("--hidden", tr_hidden, "hidden layer widths (3 values)")->expected(3);
    train_cmd->add_option("--epochs", tr_epochs, "training epochs");
    train_cmd->add_option("--batch", tr_batch, "mini-batch size");
    train_cmd->add_option("--alpha", tr_alpha, "ADAM learning rate");
    train_cmd->add_option("--seed", tr_seed, "shuffle/init seed");
    train_cmd->add_option("--n-t", tr_n_t, "expected window length (checked against archive)");
    train_cmd->add_option("--n-st", tr_n_st, "expected T1 slices (checked against archive)");

    // derain
    auto* derain = app.add_subcommand("derain", "remove rain from a PNG sequence");
    std::string de_input, de_out, de_clean;
    int de_first = 0, de_last = 0;
    bool de_save_masks = false;
    PipelineConfig de_cfg;
    PipelineFlags de_flags;
    derain->add_option("--input", de_input, "input pattern, e.g. rainy_%04d.png")->required();
    derain->add_option("--first", de_first, "first frame index")->required();
    derain->add_option("--last", de_last, "last frame index")->required();
    derain->add_option("--out", de_out, "output directory")->required();
    derain->add_option("--clean", de_clean, "ground-truth pattern for metrics");
    derain->add_flag("--save-masks", de_save_masks, "note detection masks in the log");
    de_flags.attach(derain, de_cfg, &de_cfg.model_path);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM (and PR with a ground-truth rain mask)");
    std::string ev_test, ev_ref, ev_out = "metrics.csv", ev_mask, ev_pr;
    int ev_first = 0, ev_last = 0, ev_margin = 8;
    eval_cmd->add_option("--test", ev_test, "sequence under test (pattern)")->required();
    eval_cmd->add_option("--ref", ev_ref, "reference sequence (pattern)")->required();
    eval_cmd->add_option("--first", ev_first)->required();
    eval_cmd->add_option("--last", ev_last)->required();
    eval_cmd->add_option("--out", ev_out, "metrics CSV path");
    eval_cmd->add_option("--rain-mask", ev_mask, "ground-truth rain mask pattern");
    eval_cmd->add_option("--pr-out", ev_pr, "PR curve CSV path");
    eval_cmd->add_option("--margin", ev_margin, "border pixels excluded from metrics");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "retrain with each feature group removed");
    std::string ab_dataset, ab_out;
    std::vector<int> ab_hidden = {64, 32, 16};
    int ab_epochs = 20, ab_batch = 50;
    double ab_alpha = 1e-4, ab_val = 0.1;
    std::uint64_t ab_seed = 0;
    ablate->add_option("--dataset", ab_dataset, "dataset archive directory")->required();
    ablate->add_option("--out", ab_out, "output directory")->required();
    ablate->add_option("--hidden", ab_hidden, "hidden layer widths (3 values)")->expected(3);
    ablate->add_option("--epochs", ab_epochs);
    ablate->add_option("--batch", ab_batch);
    ablate->add_option("--alpha", ab_alpha);
    ablate->add_option("--val-frac", ab_val, "held-out fraction");
    ablate->add_option("--seed", ab_seed);

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads <= 0) {
        if (const char* env = std::getenv("SPAC_THREADS")) threads = std::atoi(env);
    }
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (*synth) {
            const PipelineConfig defaults{};
            PipelineConfig cfg = sy_flags.resolve(sy_cfg, defaults);
            cfg.validate();
            SceneParams scene;
            RainParams rain;
            if (auto file = load_config(sy_flags.config_path)) {
                scene = scene_from_file(*file, scene);
                rain = rain_from_file(*file, rain);
            }
            if (sy_width > 0) scene.width = sy_width;
            if (sy_height > 0) scene.height = sy_height;
            if (sy_frames > 0) scene.frames = sy_frames;
            if (sy_density >= 0) rain.density = sy_density;
            if (sy_opacity_min >= 0) rain.opacity_min = sy_opacity_min;
            if (sy_opacity_max >= 0) rain.opacity_max = sy_opacity_max;
            return cmd_synth(sy_out, cfg, scene, rain, sy_scenes, sy_frames_per_scene,
                             sy_camera_speed, cfg.seed, sy_emit_frames, !sy_no_archive);
        }
        if (*train_cmd)
            return cmd_train(tr_dataset, tr_out, tr_resume, tr_features, tr_hidden, tr_epochs,
                             tr_batch, tr_alpha, tr_seed, tr_n_t, tr_n_st);
        if (*derain) {
            const PipelineConfig defaults{};
            PipelineConfig cfg = de_flags.resolve(de_cfg, defaults);
            cfg.validate();
            return cmd_derain(de_input, de_first, de_last, de_out, cfg, de_clean, de_save_masks);
        }
        if (*eval_cmd)
            return cmd_eval(ev_test, ev_ref, ev_first, ev_last, ev_out, ev_mask, ev_pr, ev_margin);
        if (*ablate)
            return cmd_ablate(ab_dataset, ab_out, ab_hidden, ab_epochs, ab_batch, ab_alpha, ab_val,
                              ab_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
