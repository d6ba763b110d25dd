#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spac/alignment.hpp"
#include "spac/cnn.hpp"
#include "spac/config.hpp"
#include "spac/features.hpp"
#include "spac/image.hpp"
#include "spac/rainmask.hpp"
#include "spac/scene.hpp"
#include "spac/superpixel.hpp"
#include "spac/synth.hpp"

namespace spac {

struct PipelineConfig {
    int n_t = 5;
    int n_x = 80;
    int n_s = 30;   // even: offsets span [-n_s/2, n_s/2-1]
    int n_st = 10;
    int sp_count = 300;
    double eps_rain = 0.012;
    double eps_e = 0.2;
    int vote_threshold = 3;
    double compactness = 10.0;
    int slic_iterations = 10;
    bool t1_exclude_current_frame = false;
    FeatureSelect features;  // must match the loaded model
    std::string model_path;  // empty = averaging mode
    std::uint64_t seed = 0;

    void validate() const;
    int feature_channels() const { return features.channel_count(n_t, n_st); }
};

// Fill config fields from a parsed TOML file ([pipeline] section).
PipelineConfig config_from_file(const ConfigFile& file, PipelineConfig base = {});

// [rain] and [scene] sections of the same file.
RainParams rain_from_file(const ConfigFile& file, RainParams base = {});
SceneParams scene_from_file(const ConfigFile& file, SceneParams base = {});

struct PatchDiagnostics {
    bool all_rain_fallback = false;
    int trimmed_pixels = 0;
    long rain_pixels = 0;
};

// Everything the front end produces for one superpixel patch.
struct FrontEndResult {
    FeatureStack stack;  // full feature set (selection applied later)
    Plane f1;            // background composite: rain pixels replaced by x_avg
    RainMask rain;
    PatchDiagnostics diag;
};

FrontEndResult run_front_end(const Window& window, const SpPatch& patch,
                             const PipelineConfig& cfg);

struct PatchResult {
    Plane derained;  // full patch; outside m_sp the input values pass through
    Plane x_avg;
    Mask m_rain;
    PatchDiagnostics diag;
};

// model == nullptr selects averaging mode (output = F1 composite).
PatchResult derain_patch(const Window& window, const SpPatch& patch, const CnnModel* model,
                         const PipelineConfig& cfg);

// Assemble the output luma by copying each SP's masked pixels from its
// derained patch; chroma comes from the input frame.  SP pixels that fell
// outside an oversized patch box pass through unchanged and are counted in
// *passthrough.  An uncovered pixel (broken partition) is an error.
Frame stitch(const SuperPixelSet& sps, const std::vector<SpPatch>& patches,
             const std::vector<Plane>& derained, const Frame& input, long* passthrough = nullptr);

struct FrameDiagnostics {
    long rain_pixels = 0;
    int all_rain_fallbacks = 0;
    long passthrough_pixels = 0;
};

Frame derain_frame(const Window& window, const PipelineConfig& cfg, const CnnModel* model,
                   FrameDiagnostics* diag = nullptr);

struct DerainResult {
    FrameSequence output;
    std::vector<FrameDiagnostics> diags;
};

// Frames processed in order with the history update: past window slots hold
// already-derained frames, future slots raw input.
DerainResult run_derain(const FrameSequence& input, const PipelineConfig& cfg,
                        const CnnModel* model);

struct DatasetGenParams {
    std::vector<RainParams> rain;  // cycled across scenes; empty = defaults
    int frames_per_scene = 12;     // window centers sampled per scene
    std::uint64_t seed = 0;
};

// Render rain over each clean scene, run the front end on sampled frames and
// emit one training sample per superpixel (target = clean patch at the box).
std::vector<TrainingSample> generate_dataset(const std::vector<FrameSequence>& clean_scenes,
                                             const DatasetGenParams& gen,
                                             const PipelineConfig& cfg);

}  // namespace spac
