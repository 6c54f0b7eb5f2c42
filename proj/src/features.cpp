#include "roidiff/features.hpp"

#include <cmath>
#include <numbers>

#include "roidiff/imaging.hpp"

namespace roidiff::features {

RawMoments raw_moments(const Raster& window) {
    if (window.channels() != 1)
        throw FormatError("raw_moments: expected single-channel window");
    if (window.empty())
        throw EmptyRoiError("raw_moments: empty window");

    RawMoments m;
    for (int y = 0; y < window.height(); ++y) {
        const std::uint8_t* row = window.row(y);
        // per-row sums keep the inner loop in plain integers
        std::int64_t r0 = 0, r1 = 0, r2 = 0;
        for (int x = 0; x < window.width(); ++x) {
            const std::int64_t v = row[x];
            r0 += v;
            r1 += v * x;
            r2 += v * x * x;
        }
        m.m00 += r0;
        m.m10 += r1;
        m.m01 += r0 * y;
        m.m11 += r1 * y;
        m.m20 += r2;
        m.m02 += r0 * static_cast<std::int64_t>(y) * y;
    }
    return m;
}

Centroid centroid(const RawMoments& m) {
    if (m.m00 == 0)
        throw ZeroMassError("centroid: M00 is zero");
    return {static_cast<double>(m.m10) / static_cast<double>(m.m00),
            static_cast<double>(m.m01) / static_cast<double>(m.m00)};
}

Centroid bbox_center(const Raster& window) {
    return {(window.width() - 1) / 2.0, (window.height() - 1) / 2.0};
}

CentralMoments central_moments(const RawMoments& m, const Centroid& c) {
    if (m.m00 == 0)
        throw ZeroMassError("central_moments: M00 is zero");
    const double m00 = static_cast<double>(m.m00);
    CentralMoments mu;
    mu.mu11 = static_cast<double>(m.m11) / m00 - c.x * c.y;
    mu.mu20 = static_cast<double>(m.m20) / m00 - c.x * c.x;
    mu.mu02 = static_cast<double>(m.m02) / m00 - c.y * c.y;
    return mu;
}

double orientation(const CentralMoments& mu) {
    const double num = 2.0 * mu.mu11;
    const double den = mu.mu20 - mu.mu02;
    if (num == 0.0 && den == 0.0) return 0.0;
    double theta = 0.5 * std::atan2(num, den);
    // fold so the value matches arctan(num/den)/2 for den != 0
    constexpr double quarter = std::numbers::pi / 4.0;
    constexpr double half = std::numbers::pi / 2.0;
    while (theta > quarter) theta -= half;
    while (theta <= -quarter) theta += half;
    return theta;
}

RoiFeatures extract_features(const segmentation::Roi& roi) {
    RoiFeatures f;
    f.raw = raw_moments(roi.window);
    if (f.raw.m00 == 0) {
        f.zero_mass = true;
        f.centroid = bbox_center(roi.window);
    } else {
        f.centroid = centroid(f.raw);
        f.central = central_moments(f.raw, f.centroid);
        f.orientation = orientation(f.central);
    }
    f.histogram = imaging::histogram10(roi.window);
    return f;
}

std::vector<AnalyzedRoi> analyze(const std::vector<segmentation::Roi>& rois) {
    std::vector<AnalyzedRoi> out;
    out.reserve(rois.size());
    for (const auto& roi : rois)
        out.push_back({roi, extract_features(roi)});
    return out;
}

} // namespace roidiff::features
