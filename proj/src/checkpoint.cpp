#include "spac/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace spac {

namespace {

using nlohmann::json;

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

std::string encode_doubles(const std::vector<double>& v) {
    std::vector<std::uint8_t> bytes(v.size() * 8);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto u = std::bit_cast<std::uint64_t>(v[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<std::uint8_t>(u >> (8 * b));
    }
    return base64_encode(bytes.data(), bytes.size());
}

std::vector<double> decode_doubles(const std::string& text, std::size_t expected) {
    const std::vector<std::uint8_t> bytes = base64_decode(text);
    if (bytes.size() != expected * 8) throw std::runtime_error("checkpoint tensor size mismatch");
    std::vector<double> v(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        std::uint64_t u = 0;
        for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
        v[i] = std::bit_cast<double>(u);
    }
    return v;
}

json grads_to_json(const Gradients& g) {
    json arr = json::array();
    for (const LayerGrad& l : g) arr.push_back({{"w", encode_doubles(l.w)}, {"b", encode_doubles(l.b)}});
    return arr;
}

Gradients grads_from_json(const json& arr, const CnnModel& model) {
    if (!arr.is_array() || arr.size() != model.layers.size())
        throw std::runtime_error("checkpoint optimizer shape mismatch");
    Gradients g(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        g[l].w = decode_doubles(arr[l].at("w").get<std::string>(), model.layers[l].weight_count());
        g[l].b = decode_doubles(arr[l].at("b").get<std::string>(), model.layers[l].b.size());
    }
    return g;
}

}  // namespace

std::string base64_encode(const std::uint8_t* data, std::size_t n) {
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    for (std::size_t i = 0; i < n; i += 3) {
        std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
        if (i + 1 < n) v |= static_cast<std::uint32_t>(data[i + 1]) << 8;
        if (i + 2 < n) v |= data[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += i + 1 < n ? kAlphabet[(v >> 6) & 63] : '=';
        out += i + 2 < n ? kAlphabet[v & 63] : '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw std::runtime_error("bad base64 length");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        std::uint32_t v = 0;
        for (int j = 0; j < 4; ++j) {
            const char c = text[i + j];
            if (c == '=') {
                if (i + 4 != text.size() || j < 2) throw std::runtime_error("bad base64 padding");
                ++pad;
                v <<= 6;
                continue;
            }
            const int d = b64_value(c);
            if (d < 0 || pad > 0) throw std::runtime_error("bad base64 character");
            v = (v << 6) | d;
        }
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

void save_checkpoint(const std::string& path, const CnnModel& model, const AdamState* state,
                     const CheckpointMeta& meta) {
    json j;
    j["format"] = "spac-checkpoint";
    j["version"] = 1;
    j["channel_order"] = meta.channel_order;
    j["n_t"] = meta.n_t;
    j["n_st"] = meta.n_st;
    j["seed"] = meta.seed;
    j["loss_history"] = meta.loss_history;
    json layers = json::array();
    for (const ConvLayer& l : model.layers)
        layers.push_back({{"in_ch", l.in_ch},
                          {"out_ch", l.out_ch},
                          {"k", l.k},
                          {"relu", l.relu},
                          {"w", encode_doubles(l.w)},
                          {"b", encode_doubles(l.b)}});
    j["layers"] = std::move(layers);
    if (state) {
        j["adam"] = {{"step", state->step},
                     {"m", grads_to_json(state->m)},
                     {"v", grads_to_json(state->v)}};
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump(1, '\t') << '\n';
}

Checkpoint load_checkpoint(const std::string& path, int expected_channels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    json j;
    in >> j;
    if (j.value("format", "") != "spac-checkpoint") throw std::runtime_error("not a checkpoint file");
    if (j.value("version", 0) != 1) throw std::runtime_error("unsupported checkpoint version");

    Checkpoint ck;
    ck.meta.channel_order = j.value("channel_order", "f1+f2+f3");
    ck.meta.n_t = j.value("n_t", 5);
    ck.meta.n_st = j.value("n_st", 10);
    ck.meta.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("loss_history")) ck.meta.loss_history = j["loss_history"].get<std::vector<double>>();

    for (const json& jl : j.at("layers")) {
        ConvLayer l;
        l.in_ch = jl.at("in_ch").get<int>();
        l.out_ch = jl.at("out_ch").get<int>();
        l.k = jl.at("k").get<int>();
        l.relu = jl.at("relu").get<bool>();
        if (l.in_ch <= 0 || l.out_ch <= 0 || l.k <= 0) throw std::runtime_error("bad checkpoint layer");
        l.w = decode_doubles(jl.at("w").get<std::string>(), l.weight_count());
        l.b = decode_doubles(jl.at("b").get<std::string>(), static_cast<std::size_t>(l.out_ch));
        ck.model.layers.push_back(std::move(l));
    }
    if (ck.model.layers.empty()) throw std::runtime_error("checkpoint has no layers");
    if (expected_channels >= 0 && ck.model.in_channels() != expected_channels)
        throw std::runtime_error("checkpoint input channels (" +
                                 std::to_string(ck.model.in_channels()) + ") do not match config (" +
                                 std::to_string(expected_channels) + ")");
    if (j.contains("adam")) {
        ck.state.step = j["adam"].at("step").get<long>();
        ck.state.m = grads_from_json(j["adam"].at("m"), ck.model);
        ck.state.v = grads_from_json(j["adam"].at("v"), ck.model);
        ck.has_state = true;
    } else {
        ck.state = make_adam_state(ck.model);
    }
    return ck;
}

}  // namespace spac
