#include "spac/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spac {

double psnr(const Plane& a, const Plane& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("psnr shape mismatch");
    if (a.rows == 0 || a.cols == 0) throw std::invalid_argument("psnr on empty plane");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        sum += d * d;
    }
    const double mse = sum / a.data.size();
    if (mse <= 0.0) return 99.0;
    return std::min(99.0, -10.0 * std::log10(mse));
}

namespace {

constexpr int kWin = 11;

const std::vector<double>& gauss_window() {
    static const std::vector<double> w = [] {
        std::vector<double> g(kWin * kWin);
        const double sigma = 1.5;
        double sum = 0.0;
        for (int r = 0; r < kWin; ++r)
            for (int c = 0; c < kWin; ++c) {
                const double dr = r - kWin / 2, dc = c - kWin / 2;
                g[r * kWin + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
                sum += g[r * kWin + c];
            }
        for (double& v : g) v /= sum;
        return g;
    }();
    return w;
}

}  // namespace

double ssim(const Plane& a, const Plane& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim shape mismatch");
    if (a.rows < kWin || a.cols < kWin) throw std::invalid_argument("ssim needs at least 11x11");
    const std::vector<double>& w = gauss_window();
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const int nr = a.rows - kWin + 1, nc = a.cols - kWin + 1;
    double total = 0.0;
    for (int r = 0; r < nr; ++r) {
        for (int c = 0; c < nc; ++c) {
            double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
            const double* pw = w.data();
            for (int i = 0; i < kWin; ++i) {
                const double* pa = a.row(r + i) + c;
                const double* pb = b.row(r + i) + c;
                for (int j = 0; j < kWin; ++j, ++pw) {
                    const double wa = *pw * pa[j], wb = *pw * pb[j];
                    ma += wa;
                    mb += wb;
                    maa += wa * pa[j];
                    mbb += wb * pb[j];
                    mab += wa * pb[j];
                }
            }
            const double va = maa - ma * ma, vb = mbb - mb * mb, cov = mab - ma * mb;
            const double num = (2 * ma * mb + c1) * (2 * cov + c2);
            const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
            total += num / den;
        }
    }
    return total / (static_cast<double>(nr) * nc);
}

Plane crop_border(const Plane& p, int margin) {
    if (margin < 0 || p.rows <= 2 * margin || p.cols <= 2 * margin)
        throw std::invalid_argument("bad crop margin");
    Plane out(p.rows - 2 * margin, p.cols - 2 * margin);
    for (int r = 0; r < out.rows; ++r)
        std::copy(p.row(r + margin) + margin, p.row(r + margin) + margin + out.cols, out.row(r));
    return out;
}

PrCurve rain_edge_pr(const Plane& derained, const Plane& clean_gt, const Mask& rain_mask_gt,
                     const std::vector<double>& thresholds) {
    if (!derained.same_shape(clean_gt) || derained.rows != rain_mask_gt.rows ||
        derained.cols != rain_mask_gt.cols)
        throw std::invalid_argument("rain_edge_pr shape mismatch");
    if (thresholds.empty()) throw std::invalid_argument("no thresholds");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] <= 0.0 || thresholds[i] >= 1.0)
            throw std::invalid_argument("thresholds must lie in (0,1)");
        if (i > 0 && thresholds[i] <= thresholds[i - 1])
            throw std::invalid_argument("thresholds must be strictly increasing");
    }
    const long gt_total = count_nonzero(rain_mask_gt);
    if (gt_total == 0) throw std::invalid_argument("ground-truth rain mask is empty");

    PrCurve curve;
    for (double tau : thresholds) {
        long det = 0, tp = 0;
        for (int r = 0; r < derained.rows; ++r) {
            const double* pd = derained.row(r);
            const double* pc = clean_gt.row(r);
            const std::uint8_t* pg = rain_mask_gt.row(r);
            for (int c = 0; c < derained.cols; ++c) {
                if (std::abs(pd[c] - pc[c]) >= tau) {
                    ++det;
                    if (pg[c]) ++tp;
                }
            }
        }
        PrPoint pt;
        pt.threshold = tau;
        pt.precision = det == 0 ? 1.0 : static_cast<double>(tp) / det;
        pt.recall = static_cast<double>(tp) / gt_total;
        curve.points.push_back(pt);
    }
    curve.f_measure = f_measure(curve);
    return curve;
}

PrCurve rain_edge_pr_sequence(const std::vector<Plane>& derained,
                              const std::vector<Plane>& clean_gt, const std::vector<Mask>& gt,
                              const std::vector<double>& thresholds) {
    if (derained.empty() || derained.size() != clean_gt.size() || derained.size() != gt.size())
        throw std::invalid_argument("rain_edge_pr_sequence length mismatch");
    if (thresholds.empty()) throw std::invalid_argument("no thresholds");
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        if (thresholds[k] <= 0.0 || thresholds[k] >= 1.0)
            throw std::invalid_argument("thresholds must lie in (0,1)");
        if (k > 0 && thresholds[k] <= thresholds[k - 1])
            throw std::invalid_argument("thresholds must be strictly increasing");
    }
    long gt_total = 0;
    for (const Mask& m : gt) gt_total += count_nonzero(m);
    if (gt_total == 0) throw std::invalid_argument("ground-truth rain mask is empty");

    std::vector<long> det(thresholds.size(), 0), tp(thresholds.size(), 0);
    for (std::size_t f = 0; f < derained.size(); ++f) {
        const Plane& d = derained[f];
        const Plane& c = clean_gt[f];
        const Mask& g = gt[f];
        if (!d.same_shape(c) || d.rows != g.rows || d.cols != g.cols)
            throw std::invalid_argument("rain_edge_pr_sequence shape mismatch");
        for (int r = 0; r < d.rows; ++r) {
            const double* pd = d.row(r);
            const double* pc = c.row(r);
            const std::uint8_t* pg = g.row(r);
            for (int col = 0; col < d.cols; ++col) {
                const double res = std::abs(pd[col] - pc[col]);
                for (std::size_t k = 0; k < thresholds.size(); ++k) {
                    if (res < thresholds[k]) break;  // thresholds ascending
                    ++det[k];
                    if (pg[col]) ++tp[k];
                }
            }
        }
    }
    PrCurve curve;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        PrPoint pt;
        pt.threshold = thresholds[k];
        pt.precision = det[k] == 0 ? 1.0 : static_cast<double>(tp[k]) / det[k];
        pt.recall = static_cast<double>(tp[k]) / gt_total;
        curve.points.push_back(pt);
    }
    curve.f_measure = f_measure(curve);
    return curve;
}

double masked_psnr(const Plane& a, const Plane& b, const Mask& m) {
    if (!a.same_shape(b) || a.rows != m.rows || a.cols != m.cols)
        throw std::invalid_argument("masked_psnr shape mismatch");
    const long n = count_nonzero(m);
    if (n == 0) throw std::invalid_argument("masked_psnr with empty mask");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        if (!m.data[i]) continue;
        const double d = a.data[i] - b.data[i];
        sum += d * d;
    }
    const double mse = sum / n;
    if (mse <= 0.0) return 99.0;
    return std::min(99.0, -10.0 * std::log10(mse));
}

double f_measure(const PrCurve& curve) {
    if (curve.points.empty()) throw std::invalid_argument("empty PR curve");
    double best = 0.0;
    for (const PrPoint& pt : curve.points) {
        const double s = pt.precision + pt.recall;
        if (s > 0.0) best = std::max(best, 2.0 * pt.precision * pt.recall / s);
    }
    return best;
}

std::vector<double> default_pr_thresholds(int count) {
    if (count < 2) throw std::invalid_argument("need at least 2 thresholds");
    std::vector<double> t(count);
    const double lo = 0.005, hi = 0.25;
    for (int i = 0; i < count; ++i) t[i] = lo + (hi - lo) * i / (count - 1);
    return t;
}

}  // namespace spac
