/**
 * @file pipeline.hpp
 * @brief End-to-end page comparison: segmentation, matching, optional
 *        classifier filtering, JSON report and red-overlay rendering.
 */
#ifndef ROIDIFF_PIPELINE_HPP
#define ROIDIFF_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "roidiff/classifier.hpp"
#include "roidiff/matching.hpp"
#include "roidiff/segmentation.hpp"

namespace roidiff::pipeline {

struct PipelineConfig {
    segmentation::SegmentationConfig seg;
    matching::MatchParams match;
    int config_index = 1; // browser-platform combination of the page under test
};

struct StageTimings {
    double segmentation_ms = 0.0;
    double features_ms = 0.0;
    double matching_ms = 0.0;
    double fallback_ms = 0.0;
    double classify_ms = 0.0;
    double total_ms = 0.0;
};

struct PairRecord {
    std::optional<Box> baseline_bbox;
    std::optional<Box> test_bbox;
    bool matched_exact = false;
    std::optional<double> ssd_norm; // present iff the fallback scan ran
    std::optional<std::pair<int, int>> offset;
    double correlation = 0.0;
    matching::Verdict bare_verdict = matching::Verdict::Compatible;
    matching::Verdict verdict = matching::Verdict::Compatible; // after filtering
    std::optional<int> classifier_class;
    std::optional<double> classifier_probability;

    friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct ComparisonReport {
    int schema_version = 1;
    std::string tool_version;
    matching::Verdict verdict = matching::Verdict::Compatible;
    double mismatch_density = 0.0;
    std::size_t unmatched_test = 0;
    std::size_t total_test = 0;
    std::vector<PairRecord> pairs;
    PipelineConfig config;
    bool classifier_applied = false;
    StageTimings timings; // excluded from canonical serialization by default

    std::size_t incompatibility_count() const {
        std::size_t n = 0;
        for (const auto& p : pairs)
            n += p.verdict == matching::Verdict::PotentialIncompatibility;
        return n;
    }
};

/// Compare two screenshots. Pages must share the pixel width; a height
/// mismatch is padded with background rows. When a model is given, every
/// potential incompatibility it classifies as benign is demoted to
/// compatible and the page verdict is recomputed.
ComparisonReport compare_pages(const Raster& baseline, const Raster& under_test,
                               const PipelineConfig& cfg,
                               const classifier::Model* model = nullptr);

/// Under-test screenshot with surviving incompatibilities tinted red:
/// translucent fill (single layer even when boxes overlap) plus a 2 px
/// solid border. Always returns RGBA.
Raster render_overlay(const Raster& under_test, const ComparisonReport& report);

/// Stable-key JSON. Timings are emitted only on request so that reports
/// for identical inputs are byte-identical.
std::string report_to_json(const ComparisonReport& report, bool include_timings = false);
ComparisonReport report_from_json(const std::string& text);

bool reports_equal_ignoring_timings(const ComparisonReport& a, const ComparisonReport& b);

} // namespace roidiff::pipeline

#endif
