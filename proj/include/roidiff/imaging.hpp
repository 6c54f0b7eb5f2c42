/**
 * @file imaging.hpp
 * @brief Pixel-level primitives: grayscale conversion, Harris corners,
 *        binary morphology, blob analysis, intensity histogram, SSD.
 *
 * All operations are pure functions over immutable inputs and are safe to
 * call concurrently.
 */
#ifndef ROIDIFF_IMAGING_HPP
#define ROIDIFF_IMAGING_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "roidiff/raster.hpp"

namespace roidiff::imaging {

enum class GradientKernel { Sobel, Scharr };

struct HarrisParams {
    GradientKernel kernel = GradientKernel::Sobel;
    double window_sigma = 1.0;   // gaussian window for the structure tensor
    double k = 0.04;             // sensitivity, sensible range [0.02, 0.1]
    double rel_threshold = 0.01; // fraction of the maximum response, in (0,1)
};

/// Connected region of set pixels.
struct Blob {
    Box bbox;
    std::size_t pixel_count = 0;
};

/// Rec.601 luma, rounded to nearest. Alpha is ignored; 1-channel input
/// passes through unchanged.
Raster to_grayscale(const Raster& image);

/// Corner mask: pixels whose Harris response exceeds
/// rel_threshold * max(response) and that are 3x3 local maxima.
/// A constant image yields an empty mask.
BinaryMask harris_corners(const Raster& gray, const HarrisParams& params = {});

/// Dilation with a horizontal line element of length 2*h_extent+1 followed
/// by a vertical line element of length 2*v_extent+1.
BinaryMask dilate_hv(const BinaryMask& mask, int h_extent, int v_extent);

/// 8-connected components, ordered by (top, left, bottom, right) of the
/// bounding box. Blobs are pairwise disjoint and cover every set pixel.
std::vector<Blob> connected_components(const BinaryMask& mask);

/// Raw per-bin pixel counts; bin index = min(9, intensity * 10 / 256).
std::array<std::uint64_t, 10> histogram10_counts(const Raster& gray_window);

/// Counts normalized to sum 1. Throws EmptyRoiError on an empty window.
std::array<double, 10> histogram10(const Raster& gray_window);

/// Sum of squared differences of the template against the search image with
/// the template's top-left corner at (x, y). Exact integer arithmetic.
/// Throws PlacementOutOfBoundsError when the template does not fit.
std::uint64_t ssd(const Raster& templ, const Raster& search, int x, int y);

} // namespace roidiff::imaging

#endif
