#include "spac/features.hpp"

#include <cstdlib>
#include <stdexcept>

namespace spac {

Plane occluded_background(const Plane& x_k, const Plane& x_avg, const Mask& m_rain) {
    if (!x_k.same_shape(x_avg) || x_k.rows != m_rain.rows || x_k.cols != m_rain.cols)
        throw std::invalid_argument("occluded_background shape mismatch");
    Plane f1(x_k.rows, x_k.cols);
    for (int r = 0; r < x_k.rows; ++r)
        for (int c = 0; c < x_k.cols; ++c) f1(r, c) = m_rain(r, c) ? x_avg(r, c) : x_k(r, c);
    return f1;
}

std::vector<Plane> temporal_feature(const SpacTensor& t0, int n_t) {
    if (n_t < 3 || n_t % 2 == 0) throw std::invalid_argument("n_t must be odd and >= 3");
    const int half = n_t / 2;
    std::vector<Plane> f2;
    f2.reserve(n_t - 1);
    for (int d = -half; d <= half; ++d) {
        if (d == 0) continue;
        // nearest available non-self slice to the desired rel-t; ties toward
        // the earlier frame
        int best = -1;
        for (std::size_t s = 0; s < t0.provenance.size(); ++s) {
            const int t = t0.provenance[s].t;
            if (t == 0) continue;
            if (best < 0) {
                best = static_cast<int>(s);
                continue;
            }
            const int bt = t0.provenance[best].t;
            if (std::abs(t - d) < std::abs(bt - d) ||
                (std::abs(t - d) == std::abs(bt - d) && t < bt))
                best = static_cast<int>(s);
        }
        if (best < 0) throw std::invalid_argument("T0 has no non-self slices");
        f2.push_back(t0.slices[best]);
    }
    return f2;
}

std::vector<Plane> detail_feature(const SpacTensor& t1) {
    return t1.slices;
}

FeatureStack select_features(const FeatureStack& stack, const FeatureSelect& sel, int n_t,
                             int n_st) {
    if (stack.channels.ch != 1 + (n_t - 1) + n_st)
        throw std::invalid_argument("stack is not a full feature set");
    FeatureStack out;
    out.x_avg = stack.x_avg;
    out.m_sp = stack.m_sp;
    out.channels = Tensor3(sel.channel_count(n_t, n_st), stack.channels.rows, stack.channels.cols);
    int k = 0;
    auto copy_range = [&](int begin, int end) {
        for (int c = begin; c < end; ++c) out.channels.set_slice(k++, stack.channels.slice(c));
    };
    if (sel.f1) copy_range(0, 1);
    if (sel.f2) copy_range(1, n_t);
    if (sel.f3) copy_range(n_t, n_t + n_st);
    return out;
}

std::string feature_tag(const FeatureSelect& sel) {
    std::string tag;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!tag.empty()) tag += '+';
        tag += name;
    };
    add(sel.f1, "f1");
    add(sel.f2, "f2");
    add(sel.f3, "f3");
    return tag.empty() ? "none" : tag;
}

FeatureSelect parse_feature_tag(const std::string& tag) {
    FeatureSelect sel{false, false, false};
    std::size_t pos = 0;
    while (pos < tag.size()) {
        std::size_t next = tag.find('+', pos);
        if (next == std::string::npos) next = tag.size();
        const std::string part = tag.substr(pos, next - pos);
        if (part == "f1")
            sel.f1 = true;
        else if (part == "f2")
            sel.f2 = true;
        else if (part == "f3")
            sel.f3 = true;
        else if (part != "none")
            throw std::invalid_argument("bad feature tag: " + tag);
        pos = next + 1;
    }
    return sel;
}

FeatureStack normalize_stack(const Plane& f1, const std::vector<Plane>& f2,
                             const std::vector<Plane>& f3, const Plane& x_avg, const Mask& m_sp) {
    const int n = f1.rows;
    if (f1.cols != n || !x_avg.same_shape(f1) || m_sp.rows != n || m_sp.cols != n)
        throw std::invalid_argument("normalize_stack shape mismatch");
    const int ch = 1 + static_cast<int>(f2.size()) + static_cast<int>(f3.size());
    FeatureStack stack;
    stack.channels = Tensor3(ch, n, n);
    stack.x_avg = x_avg;
    stack.m_sp = m_sp;
    int k = 0;
    auto put = [&](const Plane& f) {
        if (!f.same_shape(f1)) throw std::invalid_argument("normalize_stack shape mismatch");
        for (int r = 0; r < n; ++r) {
            const double* pf = f.row(r);
            const double* pa = x_avg.row(r);
            const std::uint8_t* pm = m_sp.row(r);
            double* po = stack.channels.row(k, r);
            for (int c = 0; c < n; ++c) po[c] = pm[c] ? pf[c] - pa[c] : 0.0;
        }
        ++k;
    };
    put(f1);
    for (const Plane& f : f2) put(f);
    for (const Plane& f : f3) put(f);
    return stack;
}

}  // namespace spac
