#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "spac/features.hpp"
#include "spac/image.hpp"
#include "spac/tensor.hpp"

namespace spac {

struct ConvLayer {
    int in_ch = 0, out_ch = 0, k = 1;
    bool relu = true;  // ReLU after this layer
    std::vector<double> w;  // out_ch × in_ch × k × k
    std::vector<double> b;  // out_ch

    std::size_t weight_count() const {
        return static_cast<std::size_t>(out_ch) * in_ch * k * k;
    }
    double& wat(int o, int i, int kr, int kc) {
        return w[((static_cast<std::size_t>(o) * in_ch + i) * k + kr) * k + kc];
    }
    double wat(int o, int i, int kr, int kc) const {
        return w[((static_cast<std::size_t>(o) * in_ch + i) * k + kr) * k + kc];
    }
};

// Detail-compensation network: 4 conv layers, kernels 11/5/3/1, same padding,
// ReLU after all but the last (the output is a signed residual).
struct CnnModel {
    std::vector<ConvLayer> layers;

    int in_channels() const { return layers.empty() ? 0 : layers.front().in_ch; }
    std::size_t param_count() const;
};

inline const std::vector<int> kDefaultHidden = {64, 32, 16};

// Zero-initialized model; hidden = widths of the three inner layers.
CnnModel make_model(int in_ch, const std::vector<int>& hidden = kDefaultHidden);

// Xavier uniform init, a = sqrt(6 / (fan_in + fan_out)) with fan = ch·k²;
// biases zero.  Deterministic in the seed.
CnnModel xavier_init(int in_ch, const std::vector<int>& hidden, std::uint64_t seed);

// One conv layer, same padding, stride 1, plus bias and optional ReLU.
Tensor3 conv_forward(const ConvLayer& layer, const Tensor3& in);

// Full forward pass; result masked by stack.m_sp.  If acts != nullptr the
// per-layer activations are kept for backprop (acts[0] = input).
Plane forward(const CnnModel& model, const FeatureStack& stack,
              std::vector<Tensor3>* acts = nullptr);

struct LayerGrad {
    std::vector<double> w, b;
};
using Gradients = std::vector<LayerGrad>;

Gradients make_gradients(const CnnModel& model);
void scale_add(Gradients& acc, const Gradients& g, double scale);  // acc += scale·g

struct TrainingSample {
    FeatureStack stack;
    Plane x_hat;  // clean ground-truth patch at the same box
};

// E = mean over m_sp pixels of (x̂ − x_avg − x_detail)².
double sample_loss(const CnnModel& model, const TrainingSample& sample);

// Loss plus full parameter gradients via backprop.  `grads` is overwritten.
double loss_and_grad(const CnnModel& model, const TrainingSample& sample, Gradients& grads);

struct AdamParams {
    double beta1 = 0.9, beta2 = 0.999, alpha = 1e-4, eps = 1e-8;
};

struct AdamState {
    Gradients m, v;  // first/second moments, parameter-shaped
    long step = 0;
};

AdamState make_adam_state(const CnnModel& model);
void adam_step(CnnModel& model, AdamState& state, const Gradients& grads, const AdamParams& p);

struct TrainParams {
    int epochs = 30;
    int batch_size = 50;
    std::uint64_t seed = 0;
    AdamParams adam;
    // called after each epoch with the mean training loss
    std::function<void(int epoch, double loss, const CnnModel&, const AdamState&)> on_epoch;
};

struct TrainResult {
    CnnModel model;
    AdamState state;
    std::vector<double> loss_history;  // per-epoch mean
};

// Seeded-shuffle mini-batch ADAM.  Deterministic: same seed and data give a
// bit-identical loss history.  resume_state continues a previous run's
// optimizer moments and step counter.
TrainResult train(CnnModel init, const std::vector<TrainingSample>& data, const TrainParams& p,
                  const AdamState* resume_state = nullptr);

}  // namespace spac
