#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spac/cnn.hpp"

namespace spac {

struct DatasetManifest {
    std::string channel_order = "f1+f2+f3";
    int n_t = 5, n_st = 10, n_x = 80;
    int sample_count = 0;
    std::string sample_pattern = "samples/sample_%06d.bin";
    std::uint64_t seed = 0;
    std::string params_json = "{}";  // free-form provenance (scene, rain, config)
};

// Archive layout: <dir>/manifest.json plus one binary record per sample.
// Records are shape-prefixed little-endian float32 arrays in a fixed order:
// features (3-D), x_avg, m_sp, x_hat (2-D each).
void write_dataset(const std::string& dir, const std::vector<TrainingSample>& samples,
                   DatasetManifest meta);

std::vector<TrainingSample> load_dataset(const std::string& dir, DatasetManifest* meta = nullptr);

void write_sample(const std::string& path, const TrainingSample& sample);
TrainingSample read_sample(const std::string& path);

}  // namespace spac
