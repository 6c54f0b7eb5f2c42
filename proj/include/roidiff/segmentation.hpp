/**
 * @file segmentation.hpp
 * @brief Page segmentation: corner mask -> adaptive dilation -> blobs -> ROIs.
 */
#ifndef ROIDIFF_SEGMENTATION_HPP
#define ROIDIFF_SEGMENTATION_HPP

#include <string>
#include <vector>

#include "roidiff/imaging.hpp"
#include "roidiff/raster.hpp"

namespace roidiff::segmentation {

enum class PageSource { Baseline, UnderTest };

/// A segmented page region: bounding box plus the grayscale pixel window.
struct Roi {
    int id = 0; // position in the deterministic segmentation order
    Box bbox;
    Raster window; // crop of the page, same size as bbox
    PageSource source = PageSource::Baseline;
};

struct SegmentationConfig {
    int max_dilation_extent = 10;
    int min_dilation_extent = 2;
    int max_roi_side = 300;
    // Per-axis multipliers on the loop extent; 1.0 keeps both directions equal.
    double h_extent_scale = 1.0;
    double v_extent_scale = 1.0;
    imaging::HarrisParams harris;
};

/// One loop iteration, recorded when a trace sink is supplied.
struct SegmentIteration {
    int extent = 0;
    BinaryMask dilated;
    int largest_side = 0;
    std::size_t blob_count = 0;
};

/// Corner-dilation-blob loop. The corner mask is computed once; the dilation
/// extent is decremented from max to min and the first extent whose largest
/// ROI side is below max_roi_side wins. If none qualifies the min-extent
/// segmentation is returned.
std::vector<Roi> segment(const Raster& gray_page, const SegmentationConfig& cfg,
                         PageSource source = PageSource::Baseline,
                         std::vector<SegmentIteration>* trace = nullptr);

struct RoiInventory {
    std::size_t count = 0;
    int max_side = 0;
    std::uint64_t total_area = 0;
};

RoiInventory roi_inventory(const std::vector<Roi>& rois);

} // namespace roidiff::segmentation

#endif
