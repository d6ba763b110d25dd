#pragma once

#include <string>
#include <vector>

#include "spac/alignment.hpp"
#include "spac/image.hpp"
#include "spac/tensor.hpp"

namespace spac {

// CNN input stack, channel order [F̂1 | F̂2 t-ascending | F̂3 cost-ascending].
// Every channel is zero outside m_sp.
struct FeatureStack {
    Tensor3 channels;
    Plane x_avg;
    Mask m_sp;
};

// F1: current patch with rain pixels replaced by the slice average.
Plane occluded_background(const Plane& x_k, const Plane& x_avg, const Mask& m_rain);

// F2: the aligned t != 0 slices of T0, t-ascending, n_t-1 channels.  When the
// window shrank at a sequence boundary the missing rel-t slots are filled with
// the nearest available slice so the channel count stays fixed.
std::vector<Plane> temporal_feature(const SpacTensor& t0, int n_t);

// F3: the n_st sorted slices of T1.
std::vector<Plane> detail_feature(const SpacTensor& t1);

// Subtract the low-frequency component X_avg from every channel and mask to
// the superpixel.  Values may go negative; no further normalization.
FeatureStack normalize_stack(const Plane& f1, const std::vector<Plane>& f2,
                             const std::vector<Plane>& f3, const Plane& x_avg, const Mask& m_sp);

// Which feature groups to keep (ablation runs drop one).
struct FeatureSelect {
    bool f1 = true, f2 = true, f3 = true;

    int channel_count(int n_t, int n_st) const {
        return (f1 ? 1 : 0) + (f2 ? n_t - 1 : 0) + (f3 ? n_st : 0);
    }
    bool full() const { return f1 && f2 && f3; }
};

// Drop the channels of disabled groups from a full stack.
FeatureStack select_features(const FeatureStack& stack, const FeatureSelect& sel, int n_t,
                             int n_st);

// e.g. "f1+f2+f3", "f2+f3"
std::string feature_tag(const FeatureSelect& sel);
FeatureSelect parse_feature_tag(const std::string& tag);

}  // namespace spac
