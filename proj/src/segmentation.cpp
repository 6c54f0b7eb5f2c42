#include "roidiff/segmentation.hpp"

#include <algorithm>
#include <cmath>

namespace roidiff::segmentation {

namespace {

std::vector<Roi> rois_from_blobs(const Raster& page, const std::vector<imaging::Blob>& blobs,
                                 PageSource source) {
    std::vector<Roi> rois;
    rois.reserve(blobs.size());
    int id = 0;
    for (const auto& blob : blobs) {
        Roi roi;
        roi.id = id++;
        roi.bbox = blob.bbox;
        roi.window = page.crop(blob.bbox);
        roi.source = source;
        rois.push_back(std::move(roi));
    }
    return rois;
}

int scaled_extent(int e, double scale) {
    return std::max(0, static_cast<int>(std::lround(e * scale)));
}

} // namespace

std::vector<Roi> segment(const Raster& gray_page, const SegmentationConfig& cfg,
                         PageSource source, std::vector<SegmentIteration>* trace) {
    if (gray_page.channels() != 1)
        throw FormatError("segment: expected single-channel page");
    if (cfg.min_dilation_extent > cfg.max_dilation_extent || cfg.max_roi_side <= 0)
        throw FormatError("segment: invalid config");

    const BinaryMask corners = imaging::harris_corners(gray_page, cfg.harris);

    std::vector<imaging::Blob> last_blobs;
    int prev_largest = -1;
    for (int e = cfg.max_dilation_extent; e >= cfg.min_dilation_extent; --e) {
        const BinaryMask dilated = imaging::dilate_hv(corners,
                                                      scaled_extent(e, cfg.h_extent_scale),
                                                      scaled_extent(e, cfg.v_extent_scale));
        last_blobs = imaging::connected_components(dilated);
        int largest = 0;
        for (const auto& blob : last_blobs)
            largest = std::max({largest, blob.bbox.width, blob.bbox.height});

        if (trace)
            trace->push_back({e, dilated, largest, last_blobs.size()});

        // shrinking the structuring element cannot grow any blob
        if (prev_largest >= 0 && largest > prev_largest)
            throw FormatError("segment: dilation monotonicity violated");
        prev_largest = largest;

        if (largest < cfg.max_roi_side)
            return rois_from_blobs(gray_page, last_blobs, source);
    }
    // no extent met the cap: fall back to the min-extent segmentation
    return rois_from_blobs(gray_page, last_blobs, source);
}

RoiInventory roi_inventory(const std::vector<Roi>& rois) {
    RoiInventory inv;
    inv.count = rois.size();
    for (const auto& roi : rois) {
        inv.max_side = std::max({inv.max_side, roi.bbox.width, roi.bbox.height});
        inv.total_area += static_cast<std::uint64_t>(roi.bbox.width) * roi.bbox.height;
    }
    return inv;
}

} // namespace roidiff::segmentation
