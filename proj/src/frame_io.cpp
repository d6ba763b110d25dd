#include "spac/frame_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace spac {

Ycbcr rgb_to_ycbcr(double r, double g, double b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    const double cb = 0.5 + (b - y) * 0.564;
    const double cr = 0.5 + (r - y) * 0.713;
    return {clamp01(y), clamp01(cb), clamp01(cr)};
}

Rgb ycbcr_to_rgb(double y, double cb, double cr) {
    const double r = y + (cr - 0.5) / 0.713;
    const double b = y + (cb - 0.5) / 0.564;
    const double g = (y - 0.299 * r - 0.114 * b) / 0.587;
    return {clamp01(r), clamp01(g), clamp01(b)};
}

std::string expand_pattern(const std::string& pattern, int index) {
    // Exactly one %...d conversion, no other % except %%.
    int conversions = 0;
    for (size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] != '%') continue;
        if (i + 1 < pattern.size() && pattern[i + 1] == '%') {
            ++i;
            continue;
        }
        size_t j = i + 1;
        while (j < pattern.size() && (std::isdigit(static_cast<unsigned char>(pattern[j])) ||
                                      pattern[j] == '0' || pattern[j] == '-')) {
            ++j;
        }
        if (j >= pattern.size() || pattern[j] != 'd') {
            throw std::runtime_error("pattern must use a single %d-style conversion: " + pattern);
        }
        ++conversions;
        i = j;
    }
    if (conversions != 1) {
        throw std::runtime_error("pattern must contain exactly one %d conversion: " + pattern);
    }
    char buf[4096];
    std::snprintf(buf, sizeof(buf), pattern.c_str(), index);
    return std::string(buf);
}

namespace {

struct PngReader {
    FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriter {
    FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

// Reads any PNG into interleaved RGB rows, 8 or 16 bits per sample.
void read_png_rgb(const std::string& path, int& width, int& height, int& bit_depth,
                  std::vector<std::vector<unsigned char>>& rows) {
    PngReader ctx;
    ctx.fp = std::fopen(path.c_str(), "rb");
    if (!ctx.fp) throw std::runtime_error("cannot open image: " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8)) {
        throw std::runtime_error("not a PNG file: " + path);
    }
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) throw std::runtime_error("PNG decode error: " + path);

    png_init_io(ctx.png, ctx.fp);
    png_set_sig_bytes(ctx.png, 8);
    png_read_info(ctx.png, ctx.info);

    width = png_get_image_width(ctx.png, ctx.info);
    height = png_get_image_height(ctx.png, ctx.info);
    bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    const int color_type = png_get_color_type(ctx.png, ctx.info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(ctx.png);
    }
    png_set_strip_alpha(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    const size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
    rows.assign(height, std::vector<unsigned char>(rowbytes));
    std::vector<png_bytep> row_ptrs(height);
    for (int r = 0; r < height; ++r) row_ptrs[r] = rows[r].data();
    png_read_image(ctx.png, row_ptrs.data());
    png_read_end(ctx.png, nullptr);
}

void write_png(const std::string& path, int width, int height, int bit_depth, int color_type,
               const std::vector<std::vector<unsigned char>>& rows) {
    PngWriter ctx;
    ctx.fp = std::fopen(path.c_str(), "wb");
    if (!ctx.fp) throw std::runtime_error("cannot write image: " + path);
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) throw std::runtime_error("PNG encode error: " + path);

    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    std::vector<png_bytep> row_ptrs(height);
    for (int r = 0; r < height; ++r) {
        row_ptrs[r] = const_cast<png_bytep>(rows[r].data());
    }
    png_write_image(ctx.png, row_ptrs.data());
    png_write_end(ctx.png, nullptr);
}

inline int quant8(double v) { return static_cast<int>(std::lround(clamp01(v) * 255.0)); }

}  // namespace

Frame load_frame(const std::string& path) {
    int w = 0, h = 0, depth = 0;
    std::vector<std::vector<unsigned char>> rows;
    read_png_rgb(path, w, h, depth, rows);

    Frame frame(h, w);
    const double scale = (depth == 16) ? 1.0 / 65535.0 : 1.0 / 255.0;
    for (int r = 0; r < h; ++r) {
        const unsigned char* p = rows[r].data();
        for (int c = 0; c < w; ++c) {
            double rv, gv, bv;
            if (depth == 16) {
                // PNG 16-bit samples are big-endian.
                rv = (p[0] << 8 | p[1]) * scale;
                gv = (p[2] << 8 | p[3]) * scale;
                bv = (p[4] << 8 | p[5]) * scale;
                p += 6;
            } else {
                rv = p[0] * scale;
                gv = p[1] * scale;
                bv = p[2] * scale;
                p += 3;
            }
            const Ycbcr s = rgb_to_ycbcr(rv, gv, bv);
            frame.y(r, c) = s.y;
            frame.cb(r, c) = s.cb;
            frame.cr(r, c) = s.cr;
        }
    }
    return frame;
}

void save_frame(const Frame& frame, const std::string& path) {
    const int h = frame.height(), w = frame.width();
    std::vector<std::vector<unsigned char>> rows(h, std::vector<unsigned char>(3 * w));
    for (int r = 0; r < h; ++r) {
        unsigned char* p = rows[r].data();
        for (int c = 0; c < w; ++c) {
            const Rgb rgb = ycbcr_to_rgb(frame.y(r, c), frame.cb(r, c), frame.cr(r, c));
            *p++ = static_cast<unsigned char>(quant8(rgb.r));
            *p++ = static_cast<unsigned char>(quant8(rgb.g));
            *p++ = static_cast<unsigned char>(quant8(rgb.b));
        }
    }
    write_png(path, w, h, 8, PNG_COLOR_TYPE_RGB, rows);
}

Mask load_mask(const std::string& path) {
    int w = 0, h = 0, depth = 0;
    std::vector<std::vector<unsigned char>> rows;
    read_png_rgb(path, w, h, depth, rows);
    Mask m(h, w);
    const int step = (depth == 16) ? 6 : 3;
    const int threshold = (depth == 16) ? 128 * 256 : 128;
    for (int r = 0; r < h; ++r) {
        const unsigned char* p = rows[r].data();
        for (int c = 0; c < w; ++c, p += step) {
            const int v = (depth == 16) ? (p[0] << 8 | p[1]) : p[0];
            m(r, c) = v >= threshold ? 1 : 0;
        }
    }
    return m;
}

void save_mask(const Mask& mask, const std::string& path) {
    const int h = mask.rows, w = mask.cols;
    std::vector<std::vector<unsigned char>> rows(h, std::vector<unsigned char>(w));
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) rows[r][c] = mask(r, c) ? 255 : 0;
    }
    write_png(path, w, h, 8, PNG_COLOR_TYPE_GRAY, rows);
}

Plane load_gray16(const std::string& path) {
    int w = 0, h = 0, depth = 0;
    std::vector<std::vector<unsigned char>> rows;
    read_png_rgb(path, w, h, depth, rows);
    Plane out(h, w);
    const int step = (depth == 16) ? 6 : 3;
    const double scale = (depth == 16) ? 1.0 / 65535.0 : 1.0 / 255.0;
    for (int r = 0; r < h; ++r) {
        const unsigned char* p = rows[r].data();
        for (int c = 0; c < w; ++c, p += step) {
            out(r, c) = ((depth == 16) ? (p[0] << 8 | p[1]) : p[0]) * scale;
        }
    }
    return out;
}

void save_gray16(const Plane& plane, const std::string& path) {
    const int h = plane.rows, w = plane.cols;
    std::vector<std::vector<unsigned char>> rows(h, std::vector<unsigned char>(2 * w));
    for (int r = 0; r < h; ++r) {
        unsigned char* p = rows[r].data();
        for (int c = 0; c < w; ++c) {
            const int v = static_cast<int>(std::lround(clamp01(plane(r, c)) * 65535.0));
            *p++ = static_cast<unsigned char>(v >> 8);
            *p++ = static_cast<unsigned char>(v & 0xff);
        }
    }
    write_png(path, w, h, 16, PNG_COLOR_TYPE_GRAY, rows);
}

FrameSequence load_sequence(const std::string& pattern, int first, int last) {
    if (last < first) throw std::runtime_error("empty sequence: last index before first");
    FrameSequence seq;
    for (int i = first; i <= last; ++i) {
        const std::string path = expand_pattern(pattern, i);
        seq.push_back(load_frame(path));
    }
    if (seq.empty()) throw std::runtime_error("empty sequence: " + pattern);
    return seq;
}

void save_sequence(const FrameSequence& seq, const std::string& pattern, int first) {
    for (size_t i = 0; i < seq.size(); ++i) {
        save_frame(seq.frames[i], expand_pattern(pattern, first + static_cast<int>(i)));
    }
}

}  // namespace spac
