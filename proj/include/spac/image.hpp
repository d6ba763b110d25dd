#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spac {

// Row-major 2D array. Rows index down, cols index right.
template <typename T>
struct Image {
    int rows = 0;
    int cols = 0;
    std::vector<T> data;

    Image() = default;
    Image(int r, int c, T fill = T{}) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

    T& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    const T& operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    T* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const T* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool same_shape(const Image& o) const { return rows == o.rows && cols == o.cols; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

using Plane = Image<double>;
using Mask = Image<std::uint8_t>;

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// One video frame in YCbCr, all samples in [0,1]. Chroma is centered at 0.5.
struct Frame {
    Plane y, cb, cr;

    Frame() = default;
    Frame(int rows, int cols) : y(rows, cols), cb(rows, cols, 0.5), cr(rows, cols, 0.5) {}

    int height() const { return y.rows; }
    int width() const { return y.cols; }
};

// Ordered frames plus per-frame derained status. Windows of length n_t are
// extracted centered on the target frame; past slots may hold derained output.
struct FrameSequence {
    std::vector<Frame> frames;
    std::vector<std::uint8_t> derained;

    size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }

    void push_back(Frame f) {
        if (!frames.empty() &&
            (f.height() != frames[0].height() || f.width() != frames[0].width())) {
            throw std::runtime_error(
                "frame size mismatch: " + std::to_string(frames[0].width()) + "x" +
                std::to_string(frames[0].height()) + " vs " + std::to_string(f.width()) + "x" +
                std::to_string(f.height()));
        }
        frames.push_back(std::move(f));
        derained.push_back(0);
    }

    int height() const { return frames.empty() ? 0 : frames[0].height(); }
    int width() const { return frames.empty() ? 0 : frames[0].width(); }
};

inline int count_nonzero(const Mask& m) {
    int n = 0;
    for (auto v : m.data) n += (v != 0);
    return n;
}

}  // namespace spac
