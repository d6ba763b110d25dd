#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spac/cnn.hpp"

namespace spac {

struct CheckpointMeta {
    std::string channel_order = "f1+f2+f3";
    int n_t = 5, n_st = 10;
    std::uint64_t seed = 0;
    std::vector<double> loss_history;
};

struct Checkpoint {
    CnnModel model;
    AdamState state;
    bool has_state = false;
    CheckpointMeta meta;
};

// JSON file with base64-encoded little-endian f64 tensors.
void save_checkpoint(const std::string& path, const CnnModel& model, const AdamState* state,
                     const CheckpointMeta& meta);

// expected_channels >= 0 enforces the model input width (refuses a checkpoint
// trained on a different feature set).
Checkpoint load_checkpoint(const std::string& path, int expected_channels = -1);

std::string base64_encode(const std::uint8_t* data, std::size_t n);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace spac
