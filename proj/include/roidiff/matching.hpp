/**
 * @file matching.hpp
 * @brief Pairing of baseline ROIs against under-test ROIs and the SSD
 *        fallback scan for the unmatched ones.
 */
#ifndef ROIDIFF_MATCHING_HPP
#define ROIDIFF_MATCHING_HPP

#include <optional>
#include <vector>

#include "roidiff/features.hpp"

namespace roidiff::matching {

struct MatchParams {
    double centroid_tol = 10.0;      // px, page-coordinate centroid distance
    double size_tol = 15.0;          // px, per dimension
    double orientation_tol = 0.087;  // rad, about 5 degrees
    int search_tolerance = 40;       // d: search region inflation in px
    double ssd_threshold = 0.01;     // normalized SSD per pixel, in [0,1]
};

enum class Verdict { Compatible, PotentialIncompatibility };

struct FallbackResult {
    double best_ssd_norm = 1.0; // min SSD / (pixels * 255^2)
    int best_dx = 0;            // best placement relative to the ROI's bbox
    int best_dy = 0;
    double correlation = 0.0;   // clamped NCC at the best placement
    bool region_valid = false;  // false when clipping left no room to scan
};

struct PairVerdict {
    std::optional<features::AnalyzedRoi> roib;
    std::optional<features::AnalyzedRoi> roit;
    bool matched_exact = false;
    std::optional<FallbackResult> fallback;
    double correlation = 0.0;
    Verdict verdict = Verdict::Compatible;
};

struct MatchSet {
    std::vector<PairVerdict> verdicts;
    std::size_t unmatched_test = 0; // E
    std::size_t total_test = 0;     // T
    double mismatch_density = 0.0;  // E / T, 0 when T == 0
};

/// Exact phase: greedy one-to-one pairing in baseline order. A candidate
/// must satisfy the centroid, size and orientation tolerances; the nearest
/// page centroid wins, ties broken by the smaller ROI id. Unmatched ROIs on
/// either side produce verdicts with an absent counterpart.
MatchSet match_rois(const std::vector<features::AnalyzedRoi>& base,
                    const std::vector<features::AnalyzedRoi>& test,
                    const MatchParams& p);

/// Exhaustive SSD scan of the ROI window over its search region on the
/// other page. The region is the ROI bbox inflated by the search tolerance
/// (centered) and clipped to the page; if clipping leaves it smaller than
/// the ROI the result is invalid with best_ssd_norm = 1.
FallbackResult ssd_fallback(const segmentation::Roi& roi, const Raster& other_page,
                            const MatchParams& p);

Verdict pair_verdict(const PairVerdict& pv, const MatchParams& p);

Verdict page_verdict(const MatchSet& ms);

} // namespace roidiff::matching

#endif
