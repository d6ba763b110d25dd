#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "spac/image.hpp"

namespace spac {

// Dense channel-major 3-D array: index (ch, row, col).
struct Tensor3 {
    int ch = 0, rows = 0, cols = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int ch_, int rows_, int cols_, double value = 0.0)
        : ch(ch_), rows(rows_), cols(cols_), data(static_cast<std::size_t>(ch_) * rows_ * cols_, value) {
        if (ch_ < 0 || rows_ < 0 || cols_ < 0) throw std::invalid_argument("negative tensor dims");
    }

    double& operator()(int k, int r, int c) {
        return data[(static_cast<std::size_t>(k) * rows + r) * cols + c];
    }
    double operator()(int k, int r, int c) const {
        return data[(static_cast<std::size_t>(k) * rows + r) * cols + c];
    }

    double* channel(int k) { return data.data() + static_cast<std::size_t>(k) * rows * cols; }
    const double* channel(int k) const {
        return data.data() + static_cast<std::size_t>(k) * rows * cols;
    }
    double* row(int k, int r) { return channel(k) + static_cast<std::size_t>(r) * cols; }
    const double* row(int k, int r) const { return channel(k) + static_cast<std::size_t>(r) * cols; }

    bool same_shape(const Tensor3& o) const {
        return ch == o.ch && rows == o.rows && cols == o.cols;
    }
    std::size_t size() const { return data.size(); }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    Plane slice(int k) const {
        Plane p(rows, cols);
        std::copy(channel(k), channel(k) + static_cast<std::size_t>(rows) * cols, p.data.begin());
        return p;
    }
    void set_slice(int k, const Plane& p) {
        if (p.rows != rows || p.cols != cols) throw std::invalid_argument("slice shape mismatch");
        std::copy(p.data.begin(), p.data.end(), channel(k));
    }
};

}  // namespace spac
