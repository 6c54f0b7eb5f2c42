/**
 * @file features.hpp
 * @brief ROI descriptors: intensity-weighted raw/central moments, centroid,
 *        orientation and the 10-bin histogram.
 */
#ifndef ROIDIFF_FEATURES_HPP
#define ROIDIFF_FEATURES_HPP

#include <array>
#include <cstdint>

#include "roidiff/raster.hpp"
#include "roidiff/segmentation.hpp"

namespace roidiff::features {

/// M_ij = sum over the window of x^i y^j I(x,y), window-local coordinates.
/// Exact 64-bit integer sums.
struct RawMoments {
    std::int64_t m00 = 0;
    std::int64_t m10 = 0;
    std::int64_t m01 = 0;
    std::int64_t m11 = 0;
    std::int64_t m20 = 0;
    std::int64_t m02 = 0;
};

struct Centroid {
    double x = 0.0;
    double y = 0.0;
};

struct CentralMoments {
    double mu11 = 0.0;
    double mu20 = 0.0;
    double mu02 = 0.0;
};

struct RoiFeatures {
    RawMoments raw;
    Centroid centroid;        // window-local pixels
    CentralMoments central;
    double orientation = 0.0; // radians, in (-pi/4, pi/4]
    std::array<double, 10> histogram{};
    bool zero_mass = false;   // all-black window, degenerate defaults applied
};

RawMoments raw_moments(const Raster& window);

/// Throws ZeroMassError when m00 == 0.
Centroid centroid(const RawMoments& m);

Centroid bbox_center(const Raster& window);

CentralMoments central_moments(const RawMoments& m, const Centroid& c);

/// theta = 1/2 * atan2(2*mu11, mu20 - mu02), folded into (-pi/4, pi/4] so it
/// coincides with the arctangent of the quotient wherever that is defined.
/// Returns 0 when both arguments vanish.
double orientation(const CentralMoments& mu);

/// All descriptors of one ROI. An all-black window gets the bbox center as
/// centroid, zero central moments and orientation, and zero_mass = true.
RoiFeatures extract_features(const segmentation::Roi& roi);

/// An ROI paired with its descriptors, the unit the matcher consumes.
struct AnalyzedRoi {
    segmentation::Roi roi;
    RoiFeatures features;
};

std::vector<AnalyzedRoi> analyze(const std::vector<segmentation::Roi>& rois);

} // namespace roidiff::features

#endif
