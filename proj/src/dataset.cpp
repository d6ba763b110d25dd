#include "spac/dataset.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "spac/frame_io.hpp"

namespace spac {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint32_t kMagic = 0x31445053;  // "SPD1"

void put_u32(std::ostream& out, std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated dataset record");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void put_array(std::ostream& out, const std::vector<std::uint32_t>& dims, const double* data,
               std::size_t n) {
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    std::size_t prod = 1;
    for (std::uint32_t d : dims) {
        put_u32(out, d);
        prod *= d;
    }
    if (prod != n) throw std::logic_error("dataset array shape mismatch");
    std::vector<std::uint8_t> buf(n * 4);
    for (std::size_t i = 0; i < n; ++i) {
        const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(data[i]));
        for (int b = 0; b < 4; ++b) buf[i * 4 + b] = static_cast<std::uint8_t>(u >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

std::vector<double> get_array(std::istream& in, std::vector<std::uint32_t>& dims) {
    const std::uint32_t ndim = get_u32(in);
    if (ndim == 0 || ndim > 4) throw std::runtime_error("bad dataset array rank");
    dims.resize(ndim);
    std::size_t prod = 1;
    for (std::uint32_t& d : dims) {
        d = get_u32(in);
        if (d == 0 || d > 1u << 16) throw std::runtime_error("bad dataset array dim");
        prod *= d;
    }
    std::vector<std::uint8_t> buf(prod * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw std::runtime_error("truncated dataset record");
    std::vector<double> data(prod);
    for (std::size_t i = 0; i < prod; ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(buf[i * 4 + b]) << (8 * b);
        data[i] = std::bit_cast<float>(u);
    }
    return data;
}

}  // namespace

void write_sample(const std::string& path, const TrainingSample& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write sample: " + path);
    put_u32(out, kMagic);
    put_u32(out, 4);  // array count
    const Tensor3& f = s.stack.channels;
    put_array(out,
              {static_cast<std::uint32_t>(f.ch), static_cast<std::uint32_t>(f.rows),
               static_cast<std::uint32_t>(f.cols)},
              f.data.data(), f.data.size());
    put_array(out,
              {static_cast<std::uint32_t>(s.stack.x_avg.rows),
               static_cast<std::uint32_t>(s.stack.x_avg.cols)},
              s.stack.x_avg.data.data(), s.stack.x_avg.data.size());
    std::vector<double> mask(s.stack.m_sp.data.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = s.stack.m_sp.data[i] ? 1.0 : 0.0;
    put_array(out,
              {static_cast<std::uint32_t>(s.stack.m_sp.rows),
               static_cast<std::uint32_t>(s.stack.m_sp.cols)},
              mask.data(), mask.size());
    put_array(out,
              {static_cast<std::uint32_t>(s.x_hat.rows), static_cast<std::uint32_t>(s.x_hat.cols)},
              s.x_hat.data.data(), s.x_hat.data.size());
    if (!out) throw std::runtime_error("write failed: " + path);
}

TrainingSample read_sample(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open sample: " + path);
    if (get_u32(in) != kMagic) throw std::runtime_error("not a dataset record: " + path);
    if (get_u32(in) != 4) throw std::runtime_error("unexpected array count: " + path);

    TrainingSample s;
    std::vector<std::uint32_t> dims;
    std::vector<double> data = get_array(in, dims);
    if (dims.size() != 3) throw std::runtime_error("features must be 3-D: " + path);
    s.stack.channels = Tensor3(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                               static_cast<int>(dims[2]));
    s.stack.channels.data = std::move(data);

    auto read_plane = [&](const char* what) {
        std::vector<double> d = get_array(in, dims);
        if (dims.size() != 2 || static_cast<int>(dims[0]) != s.stack.channels.rows ||
            static_cast<int>(dims[1]) != s.stack.channels.cols)
            throw std::runtime_error(std::string(what) + " shape mismatch: " + path);
        Plane p(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
        p.data = std::move(d);
        return p;
    };
    s.stack.x_avg = read_plane("x_avg");
    const Plane m = read_plane("m_sp");
    s.stack.m_sp = Mask(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) s.stack.m_sp.data[i] = m.data[i] > 0.5 ? 1 : 0;
    s.x_hat = read_plane("x_hat");
    return s;
}

void write_dataset(const std::string& dir, const std::vector<TrainingSample>& samples,
                   DatasetManifest meta) {
    fs::create_directories(fs::path(dir) / "samples");
    meta.sample_count = static_cast<int>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::string rel = expand_pattern(meta.sample_pattern, static_cast<int>(i));
        write_sample((fs::path(dir) / rel).string(), samples[i]);
    }
    json j;
    j["format"] = "spac-dataset";
    j["version"] = 1;
    j["channel_order"] = meta.channel_order;
    j["n_t"] = meta.n_t;
    j["n_st"] = meta.n_st;
    j["n_x"] = meta.n_x;
    j["sample_count"] = meta.sample_count;
    j["sample_pattern"] = meta.sample_pattern;
    j["seed"] = meta.seed;
    j["params"] = json::parse(meta.params_json);
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir);
    out << j.dump(1, '\t') << '\n';
}

std::vector<TrainingSample> load_dataset(const std::string& dir, DatasetManifest* meta_out) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw std::runtime_error("cannot open dataset manifest in " + dir);
    json j;
    in >> j;
    if (j.value("format", "") != "spac-dataset") throw std::runtime_error("not a dataset manifest");
    if (j.value("version", 0) != 1) throw std::runtime_error("unsupported dataset version");
    DatasetManifest meta;
    meta.channel_order = j.value("channel_order", "f1+f2+f3");
    meta.n_t = j.value("n_t", 5);
    meta.n_st = j.value("n_st", 10);
    meta.n_x = j.value("n_x", 80);
    meta.sample_count = j.at("sample_count").get<int>();
    meta.sample_pattern = j.value("sample_pattern", "samples/sample_%06d.bin");
    meta.seed = j.value("seed", std::uint64_t{0});
    meta.params_json = j.value("params", json::object()).dump();

    std::vector<TrainingSample> samples;
    samples.reserve(meta.sample_count);
    for (int i = 0; i < meta.sample_count; ++i) {
        const std::string rel = expand_pattern(meta.sample_pattern, i);
        samples.push_back(read_sample((fs::path(dir) / rel).string()));
    }
    for (const TrainingSample& s : samples)
        if (s.stack.channels.ch != samples.front().stack.channels.ch)
            throw std::runtime_error("inconsistent channel counts in dataset");
    if (meta_out) *meta_out = meta;
    return samples;
}

}  // namespace spac
