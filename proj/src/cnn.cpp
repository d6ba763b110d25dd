#include "spac/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spac/rng.hpp"

namespace spac {

namespace {

constexpr int kKernels[4] = {11, 5, 3, 1};

}  // namespace

std::size_t CnnModel::param_count() const {
    std::size_t n = 0;
    for (const ConvLayer& l : layers) n += l.weight_count() + l.b.size();
    return n;
}

CnnModel make_model(int in_ch, const std::vector<int>& hidden) {
    if (in_ch <= 0) throw std::invalid_argument("bad input channel count");
    if (hidden.size() != 3) throw std::invalid_argument("expected 3 hidden widths");
    for (int h : hidden)
        if (h <= 0) throw std::invalid_argument("bad hidden width");
    CnnModel m;
    int prev = in_ch;
    for (int l = 0; l < 4; ++l) {
        ConvLayer layer;
        layer.in_ch = prev;
        layer.out_ch = l < 3 ? hidden[l] : 1;
        layer.k = kKernels[l];
        layer.relu = l < 3;  // output is a signed residual
        layer.w.assign(layer.weight_count(), 0.0);
        layer.b.assign(layer.out_ch, 0.0);
        prev = layer.out_ch;
        m.layers.push_back(std::move(layer));
    }
    return m;
}

CnnModel xavier_init(int in_ch, const std::vector<int>& hidden, std::uint64_t seed) {
    CnnModel m = make_model(in_ch, hidden);
    rng::Engine eng(seed);
    for (ConvLayer& l : m.layers) {
        const double fan_in = static_cast<double>(l.in_ch) * l.k * l.k;
        const double fan_out = static_cast<double>(l.out_ch) * l.k * l.k;
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : l.w) w = rng::uniform(eng, -a, a);
    }
    return m;
}

Tensor3 conv_forward(const ConvLayer& layer, const Tensor3& in) {
    if (in.ch != layer.in_ch) throw std::invalid_argument("conv input channel mismatch");
    const int n = in.rows, m = in.cols, k = layer.k, pad = k / 2;
    Tensor3 out(layer.out_ch, n, m);
#pragma omp parallel for schedule(static)
    for (int o = 0; o < layer.out_ch; ++o) {
        double* oc = out.channel(o);
        std::fill(oc, oc + static_cast<std::size_t>(n) * m, layer.b[o]);
        for (int i = 0; i < layer.in_ch; ++i) {
            const double* ic = in.channel(i);
            for (int kr = 0; kr < k; ++kr) {
                const int dr = kr - pad;
                const int r0 = std::max(0, -dr), r1 = std::min(n, n - dr);
                for (int kc = 0; kc < k; ++kc) {
                    const double wv = layer.wat(o, i, kr, kc);
                    if (wv == 0.0) continue;
                    const int dc = kc - pad;
                    const int c0 = std::max(0, -dc), c1 = std::min(m, m - dc);
                    for (int r = r0; r < r1; ++r) {
                        double* po = oc + static_cast<std::size_t>(r) * m;
                        const double* pi = ic + static_cast<std::size_t>(r + dr) * m + dc;
                        for (int c = c0; c < c1; ++c) po[c] += wv * pi[c];
                    }
                }
            }
        }
        if (layer.relu)
            for (std::size_t x = 0; x < static_cast<std::size_t>(n) * m; ++x)
                oc[x] = std::max(0.0, oc[x]);
    }
    return out;
}

Plane forward(const CnnModel& model, const FeatureStack& stack, std::vector<Tensor3>* acts) {
    if (model.layers.empty()) throw std::invalid_argument("empty model");
    if (model.in_channels() != stack.channels.ch)
        throw std::invalid_argument("feature channels do not match model input");
    Tensor3 cur = stack.channels;
    if (acts) {
        acts->clear();
        acts->push_back(cur);
    }
    for (const ConvLayer& l : model.layers) {
        cur = conv_forward(l, cur);
        if (acts) acts->push_back(cur);
    }
    if (cur.ch != 1) throw std::logic_error("model output is not single-channel");
    Plane out(cur.rows, cur.cols);
    for (int r = 0; r < cur.rows; ++r) {
        const double* pi = cur.row(0, r);
        const std::uint8_t* pm = stack.m_sp.row(r);
        double* po = out.row(r);
        for (int c = 0; c < cur.cols; ++c) po[c] = pm[c] ? pi[c] : 0.0;
    }
    return out;
}

Gradients make_gradients(const CnnModel& model) {
    Gradients g(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        g[l].w.assign(model.layers[l].weight_count(), 0.0);
        g[l].b.assign(model.layers[l].b.size(), 0.0);
    }
    return g;
}

void scale_add(Gradients& acc, const Gradients& g, double scale) {
    if (acc.size() != g.size()) throw std::invalid_argument("gradient shape mismatch");
    for (std::size_t l = 0; l < acc.size(); ++l) {
        for (std::size_t i = 0; i < acc[l].w.size(); ++i) acc[l].w[i] += scale * g[l].w[i];
        for (std::size_t i = 0; i < acc[l].b.size(); ++i) acc[l].b[i] += scale * g[l].b[i];
    }
}

namespace {

void zero_gradients(Gradients& g) {
    for (LayerGrad& l : g) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
}

// Backprop through one conv layer.  a_in/a_out are the stored activations,
// dout is dL/d(a_out).  Fills g; adds nothing — overwrites.  din (optional)
// receives dL/d(a_in).
void conv_backward(const ConvLayer& layer, const Tensor3& a_in, const Tensor3& a_out,
                   const Tensor3& dout, LayerGrad& g, Tensor3* din) {
    const int n = a_in.rows, m = a_in.cols, k = layer.k, pad = k / 2;
    Tensor3 dpre = dout;
    if (layer.relu) {
        for (std::size_t x = 0; x < dpre.data.size(); ++x)
            if (a_out.data[x] <= 0.0) dpre.data[x] = 0.0;
    }
    g.w.assign(layer.weight_count(), 0.0);
    g.b.assign(layer.out_ch, 0.0);
#pragma omp parallel for schedule(static)
    for (int o = 0; o < layer.out_ch; ++o) {
        const double* dp = dpre.channel(o);
        double bsum = 0.0;
        for (std::size_t x = 0; x < static_cast<std::size_t>(n) * m; ++x) bsum += dp[x];
        g.b[o] = bsum;
        for (int i = 0; i < layer.in_ch; ++i) {
            const double* ic = a_in.channel(i);
            for (int kr = 0; kr < k; ++kr) {
                const int dr = kr - pad;
                const int r0 = std::max(0, -dr), r1 = std::min(n, n - dr);
                for (int kc = 0; kc < k; ++kc) {
                    const int dc = kc - pad;
                    const int c0 = std::max(0, -dc), c1 = std::min(m, m - dc);
                    double s = 0.0;
                    for (int r = r0; r < r1; ++r) {
                        const double* pd = dp + static_cast<std::size_t>(r) * m;
                        const double* pi = ic + static_cast<std::size_t>(r + dr) * m + dc;
                        for (int c = c0; c < c1; ++c) s += pd[c] * pi[c];
                    }
                    g.w[((static_cast<std::size_t>(o) * layer.in_ch + i) * k + kr) * k + kc] = s;
                }
            }
        }
    }
    if (!din) return;
    *din = Tensor3(layer.in_ch, n, m);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < layer.in_ch; ++i) {
        double* dc_out = din->channel(i);
        for (int o = 0; o < layer.out_ch; ++o) {
            const double* dp = dpre.channel(o);
            for (int kr = 0; kr < k; ++kr) {
                const int dr = kr - pad;
                const int r0 = std::max(0, -dr), r1 = std::min(n, n - dr);
                for (int kc = 0; kc < k; ++kc) {
                    const double wv = layer.wat(o, i, kr, kc);
                    if (wv == 0.0) continue;
                    const int dc = kc - pad;
                    const int c0 = std::max(0, -dc), c1 = std::min(m, m - dc);
                    for (int r = r0; r < r1; ++r) {
                        double* pdi = dc_out + static_cast<std::size_t>(r + dr) * m + dc;
                        const double* pd = dp + static_cast<std::size_t>(r) * m;
                        for (int c = c0; c < c1; ++c) pdi[c] += wv * pd[c];
                    }
                }
            }
        }
    }
}

double masked_loss(const Plane& detail, const TrainingSample& s, Tensor3* dout) {
    const int n = detail.rows, m = detail.cols;
    if (s.x_hat.rows != n || s.x_hat.cols != m || s.stack.x_avg.rows != n)
        throw std::invalid_argument("sample shape mismatch");
    const long cnt = count_nonzero(s.stack.m_sp);
    if (cnt == 0) throw std::invalid_argument("empty superpixel mask");
    double loss = 0.0;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < m; ++c) {
            if (!s.stack.m_sp(r, c)) {
                if (dout) (*dout)(0, r, c) = 0.0;
                continue;
            }
            const double res = s.x_hat(r, c) - s.stack.x_avg(r, c) - detail(r, c);
            loss += res * res;
            if (dout) (*dout)(0, r, c) = -2.0 / cnt * res;
        }
    }
    return loss / cnt;
}

}  // namespace

double sample_loss(const CnnModel& model, const TrainingSample& sample) {
    Plane detail = forward(model, sample.stack);
    return masked_loss(detail, sample, nullptr);
}

double loss_and_grad(const CnnModel& model, const TrainingSample& sample, Gradients& grads) {
    std::vector<Tensor3> acts;
    Plane detail = forward(model, sample.stack, &acts);
    Tensor3 dcur(1, detail.rows, detail.cols);
    const double loss = masked_loss(detail, sample, &dcur);
    if (grads.size() != model.layers.size()) grads = make_gradients(model);
    for (int l = static_cast<int>(model.layers.size()) - 1; l >= 0; --l) {
        Tensor3 dprev;
        conv_backward(model.layers[l], acts[l], acts[l + 1], dcur, grads[l],
                      l > 0 ? &dprev : nullptr);
        if (l > 0) dcur = std::move(dprev);
    }
    return loss;
}

AdamState make_adam_state(const CnnModel& model) {
    AdamState st;
    st.m = make_gradients(model);
    st.v = make_gradients(model);
    st.step = 0;
    return st;
}

void adam_step(CnnModel& model, AdamState& state, const Gradients& grads, const AdamParams& p) {
    if (grads.size() != model.layers.size() || state.m.size() != model.layers.size())
        throw std::invalid_argument("optimizer shape mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(p.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(p.beta2, static_cast<double>(state.step));
    auto update = [&](double& theta, double& m, double& v, double g) {
        m = p.beta1 * m + (1.0 - p.beta1) * g;
        v = p.beta2 * v + (1.0 - p.beta2) * g * g;
        theta -= p.alpha * (m / bc1) / (std::sqrt(v / bc2) + p.eps);
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        ConvLayer& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.w.size(); ++i)
            update(layer.w[i], state.m[l].w[i], state.v[l].w[i], grads[l].w[i]);
        for (std::size_t i = 0; i < layer.b.size(); ++i)
            update(layer.b[i], state.m[l].b[i], state.v[l].b[i], grads[l].b[i]);
    }
}

TrainResult train(CnnModel init, const std::vector<TrainingSample>& data, const TrainParams& p,
                  const AdamState* resume_state) {
    if (data.empty()) throw std::invalid_argument("empty training set");
    if (p.batch_size <= 0 || p.epochs < 0) throw std::invalid_argument("bad training params");
    for (const TrainingSample& s : data)
        if (s.stack.channels.ch != init.in_channels())
            throw std::invalid_argument("sample channels do not match model input");
    TrainResult res;
    res.model = std::move(init);
    if (resume_state) {
        if (resume_state->m.size() != res.model.layers.size())
            throw std::invalid_argument("resume state does not match model");
        for (std::size_t l = 0; l < res.model.layers.size(); ++l)
            if (resume_state->m[l].w.size() != res.model.layers[l].w.size() ||
                resume_state->m[l].b.size() != res.model.layers[l].b.size())
                throw std::invalid_argument("resume state does not match model");
        res.state = *resume_state;
    } else {
        res.state = make_adam_state(res.model);
    }
    rng::Engine eng(p.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Gradients acc = make_gradients(res.model);
    Gradients g = make_gradients(res.model);
    const std::size_t nsamp = data.size();
    for (int e = 0; e < p.epochs; ++e) {
        rng::shuffle(order, eng);
        double esum = 0.0;
        for (std::size_t b0 = 0; b0 < nsamp; b0 += p.batch_size) {
            const std::size_t bn = std::min<std::size_t>(p.batch_size, nsamp - b0);
            zero_gradients(acc);
            for (std::size_t j = b0; j < b0 + bn; ++j) {
                esum += loss_and_grad(res.model, data[order[j]], g);
                scale_add(acc, g, 1.0 / bn);
            }
            adam_step(res.model, res.state, acc, p.adam);
        }
        const double mean = esum / nsamp;
        res.loss_history.push_back(mean);
        if (p.on_epoch) p.on_epoch(e, mean, res.model, res.state);
    }
    return res;
}

}  // namespace spac
