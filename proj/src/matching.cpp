#include "roidiff/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace roidiff::matching {

namespace {

struct IntSums {
    std::int64_t sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    std::int64_t n = 0;
};

IntSums window_sums(const Raster& a, const Raster& b, int bx, int by, int w, int h) {
    IntSums s;
    s.n = static_cast<std::int64_t>(w) * h;
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* ra = a.row(y);
        const std::uint8_t* rb = b.row(by + y) + bx;
        for (int x = 0; x < w; ++x) {
            const std::int64_t va = ra[x];
            const std::int64_t vb = rb[x];
            s.sa += va;
            s.sb += vb;
            s.saa += va * va;
            s.sbb += vb * vb;
            s.sab += va * vb;
        }
    }
    return s;
}

// Pearson correlation of the two windows, clamped to [0,1]. A flat window
// makes the coefficient undefined: identical content counts as 1, else 0.
double clamped_ncc(const IntSums& s, bool identical) {
    const double num = static_cast<double>(s.n) * s.sab - static_cast<double>(s.sa) * s.sb;
    const double va = static_cast<double>(s.n) * s.saa - static_cast<double>(s.sa) * s.sa;
    const double vb = static_cast<double>(s.n) * s.sbb - static_cast<double>(s.sb) * s.sb;
    if (va <= 0.0 || vb <= 0.0) return identical ? 1.0 : 0.0;
    return std::clamp(num / std::sqrt(va * vb), 0.0, 1.0);
}

double page_centroid_distance(const features::AnalyzedRoi& a, const features::AnalyzedRoi& b) {
    const double ax = a.roi.bbox.x + a.features.centroid.x;
    const double ay = a.roi.bbox.y + a.features.centroid.y;
    const double bx = b.roi.bbox.x + b.features.centroid.x;
    const double by = b.roi.bbox.y + b.features.centroid.y;
    return std::hypot(ax - bx, ay - by);
}

bool within_tolerances(const features::AnalyzedRoi& a, const features::AnalyzedRoi& b,
                       const MatchParams& p, double* distance) {
    const double d = page_centroid_distance(a, b);
    if (d > p.centroid_tol) return false;
    if (std::abs(a.roi.bbox.width - b.roi.bbox.width) > p.size_tol) return false;
    if (std::abs(a.roi.bbox.height - b.roi.bbox.height) > p.size_tol) return false;
    if (std::abs(a.features.orientation - b.features.orientation) > p.orientation_tol) return false;
    *distance = d;
    return true;
}

// Correlation of an exactly matched pair over the top-left aligned common
// window (sizes may differ within tolerance). Identical ROIs give 1.
double matched_pair_correlation(const features::AnalyzedRoi& a, const features::AnalyzedRoi& b) {
    const int w = std::min(a.roi.window.width(), b.roi.window.width());
    const int h = std::min(a.roi.window.height(), b.roi.window.height());
    std::uint64_t diff = 0;
    IntSums s;
    s.n = static_cast<std::int64_t>(w) * h;
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* ra = a.roi.window.row(y);
        const std::uint8_t* rb = b.roi.window.row(y);
        for (int x = 0; x < w; ++x) {
            const std::int64_t va = ra[x];
            const std::int64_t vb = rb[x];
            s.sa += va;
            s.sb += vb;
            s.saa += va * va;
            s.sbb += vb * vb;
            s.sab += va * vb;
            const int d = static_cast<int>(va) - static_cast<int>(vb);
            diff += static_cast<std::uint64_t>(d * d);
        }
    }
    return clamped_ncc(s, diff == 0);
}

} // namespace

MatchSet match_rois(const std::vector<features::AnalyzedRoi>& base,
                    const std::vector<features::AnalyzedRoi>& test,
                    const MatchParams& p) {
    MatchSet ms;
    ms.total_test = test.size();

    std::vector<bool> consumed(test.size(), false);
    for (const auto& roib : base) {
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < test.size(); ++j) {
            if (consumed[j]) continue;
            double d;
            if (!within_tolerances(roib, test[j], p, &d)) continue;
            if (d < best_dist || (d == best_dist && best >= 0 && test[j].roi.id < test[best].roi.id)) {
                best = static_cast<int>(j);
                best_dist = d;
            }
        }
        PairVerdict pv;
        pv.roib = roib;
        if (best >= 0) {
            consumed[best] = true;
            pv.roit = test[best];
            pv.matched_exact = true;
            pv.correlation = matched_pair_correlation(roib, test[best]);
            pv.verdict = Verdict::Compatible;
        }
        ms.verdicts.push_back(std::move(pv));
    }
    for (std::size_t j = 0; j < test.size(); ++j) {
        if (consumed[j]) continue;
        PairVerdict pv;
        pv.roit = test[j];
        ms.verdicts.push_back(std::move(pv));
        ++ms.unmatched_test;
    }
    ms.mismatch_density = ms.total_test == 0
                              ? 0.0
                              : static_cast<double>(ms.unmatched_test) / static_cast<double>(ms.total_test);
    return ms;
}

FallbackResult ssd_fallback(const segmentation::Roi& roi, const Raster& other_page,
                            const MatchParams& p) {
    FallbackResult res;
    const int d = p.search_tolerance;
    const int rw = roi.bbox.width;
    const int rh = roi.bbox.height;

    // inflate by d with the ROI centered, then clip to the page
    int x0 = roi.bbox.x - d / 2;
    int y0 = roi.bbox.y - d / 2;
    int x1 = x0 + rw + d;
    int y1 = y0 + rh + d;
    x0 = std::max(0, x0);
    y0 = std::max(0, y0);
    x1 = std::min(other_page.width(), x1);
    y1 = std::min(other_page.height(), y1);

    if (x1 - x0 < rw || y1 - y0 < rh) {
        res.best_ssd_norm = 1.0;
        res.correlation = 0.0;
        res.region_valid = false;
        return res;
    }
    res.region_valid = true;

    const Raster& win = roi.window;
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    int best_x = x0, best_y = y0;
    for (int py = y0; py + rh <= y1; ++py) {
        for (int px = x0; px + rw <= x1; ++px) {
            // row-major scan with strict improvement: first minimum wins
            std::uint64_t acc = 0;
            for (int ty = 0; ty < rh && acc < best; ++ty) {
                const std::uint8_t* trow = win.row(ty);
                const std::uint8_t* srow = other_page.row(py + ty) + px;
                for (int tx = 0; tx < rw; ++tx) {
                    const int dv = static_cast<int>(srow[tx]) - static_cast<int>(trow[tx]);
                    acc += static_cast<std::uint64_t>(dv * dv);
                }
            }
            if (acc < best) {
                best = acc;
                best_x = px;
                best_y = py;
            }
        }
    }

    const double denom = static_cast<double>(rw) * rh * 255.0 * 255.0;
    res.best_ssd_norm = static_cast<double>(best) / denom;
    res.best_dx = best_x - roi.bbox.x;
    res.best_dy = best_y - roi.bbox.y;
    const IntSums s = window_sums(win, other_page, best_x, best_y, rw, rh);
    res.correlation = clamped_ncc(s, best == 0);
    return res;
}

Verdict pair_verdict(const PairVerdict& pv, const MatchParams& p) {
    if (pv.matched_exact) return Verdict::Compatible;
    if (pv.fallback && pv.fallback->region_valid && pv.fallback->best_ssd_norm <= p.ssd_threshold)
        return Verdict::Compatible;
    return Verdict::PotentialIncompatibility;
}

Verdict page_verdict(const MatchSet& ms) {
    for (const auto& pv : ms.verdicts)
        if (pv.verdict == Verdict::PotentialIncompatibility)
            return Verdict::PotentialIncompatibility;
    return Verdict::Compatible;
}

} // namespace roidiff::matching
