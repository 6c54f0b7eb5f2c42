#include "roidiff/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "roidiff/imaging.hpp"
#include "roidiff/version.hpp"

namespace roidiff::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

constexpr std::uint8_t kPadIntensity = 255; // missing rows count as background

Raster pad_to_height(const Raster& gray, int height) {
    if (gray.height() == height) return gray;
    Raster out(gray.width(), height, 1, kPadIntensity);
    for (int y = 0; y < gray.height(); ++y)
        std::copy(gray.row(y), gray.row(y) + gray.width(), out.row(y));
    return out;
}

} // namespace

ComparisonReport compare_pages(const Raster& baseline, const Raster& under_test,
                               const PipelineConfig& cfg, const classifier::Model* model) {
    if (baseline.width() != under_test.width())
        throw ResolutionMismatchError("compare_pages: page widths differ (" +
                                      std::to_string(baseline.width()) + " vs " +
                                      std::to_string(under_test.width()) + ")");

    ComparisonReport report;
    report.tool_version = kVersion;
    report.config = cfg;

    const auto t_total = Clock::now();

    Raster gray_base = imaging::to_grayscale(baseline);
    Raster gray_test = imaging::to_grayscale(under_test);
    const int height = std::max(gray_base.height(), gray_test.height());
    gray_base = pad_to_height(gray_base, height);
    gray_test = pad_to_height(gray_test, height);

    auto t0 = Clock::now();
    const auto rois_base = segmentation::segment(gray_base, cfg.seg,
                                                 segmentation::PageSource::Baseline);
    const auto rois_test = segmentation::segment(gray_test, cfg.seg,
                                                 segmentation::PageSource::UnderTest);
    report.timings.segmentation_ms = ms_since(t0);

    t0 = Clock::now();
    const auto base = features::analyze(rois_base);
    const auto test = features::analyze(rois_test);
    report.timings.features_ms = ms_since(t0);

    t0 = Clock::now();
    matching::MatchSet ms = matching::match_rois(base, test, cfg.match);
    report.timings.matching_ms = ms_since(t0);

    // SSD fallback for every unmatched ROI, scanned against the other page
    t0 = Clock::now();
    for (auto& pv : ms.verdicts) {
        if (pv.matched_exact) {
            pv.verdict = matching::Verdict::Compatible;
            continue;
        }
        if (pv.roib) {
            pv.fallback = matching::ssd_fallback(pv.roib->roi, gray_test, cfg.match);
        } else {
            pv.fallback = matching::ssd_fallback(pv.roit->roi, gray_base, cfg.match);
        }
        pv.correlation = pv.fallback->correlation;
        pv.verdict = matching::pair_verdict(pv, cfg.match);
    }
    report.timings.fallback_ms = ms_since(t0);

    report.mismatch_density = ms.mismatch_density;
    report.unmatched_test = ms.unmatched_test;
    report.total_test = ms.total_test;

    // classifier filter: benign verdicts are demoted, never promoted
    t0 = Clock::now();
    report.classifier_applied = model != nullptr;
    for (const auto& pv : ms.verdicts) {
        PairRecord rec;
        if (pv.roib) rec.baseline_bbox = pv.roib->roi.bbox;
        if (pv.roit) rec.test_bbox = pv.roit->roi.bbox;
        rec.matched_exact = pv.matched_exact;
        if (pv.fallback) {
            rec.ssd_norm = pv.fallback->best_ssd_norm;
            rec.offset = std::make_pair(pv.fallback->best_dx, pv.fallback->best_dy);
        }
        rec.correlation = pv.correlation;
        rec.bare_verdict = pv.verdict;
        rec.verdict = pv.verdict;

        if (model && pv.verdict == matching::Verdict::PotentialIncompatibility) {
            const classifier::FeatureVector17 fv =
                classifier::build_feature_vector(pv, cfg.config_index, ms.mismatch_density);
            const classifier::Prediction pred = classifier::predict(*model, fv);
            rec.classifier_class = pred.cls;
            rec.classifier_probability = pred.probability;
            const bool benign = classifier::model_target(*model) == classifier::Target::Binary
                                    ? pred.cls == classifier::kFalsePositive
                                    : pred.cls <= 1; // C1 and C2 are not incompatibilities
            if (benign) rec.verdict = matching::Verdict::Compatible;
        }
        report.pairs.push_back(std::move(rec));
    }
    report.timings.classify_ms = ms_since(t0);

    report.verdict = matching::Verdict::Compatible;
    for (const auto& rec : report.pairs)
        if (rec.verdict == matching::Verdict::PotentialIncompatibility) {
            report.verdict = matching::Verdict::PotentialIncompatibility;
            break;
        }

    report.timings.total_ms = ms_since(t_total);
    return report;
}

Raster render_overlay(const Raster& under_test, const ComparisonReport& report) {
    const int w = under_test.width();
    const int h = under_test.height();
    Raster out(w, h, 4);
    const int src_ch = under_test.channels();
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = under_test.row(y);
        std::uint8_t* dst = out.row(y);
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* p = src + static_cast<std::size_t>(x) * src_ch;
            std::uint8_t* q = dst + static_cast<std::size_t>(x) * 4;
            if (src_ch == 1) {
                q[0] = q[1] = q[2] = p[0];
            } else {
                q[0] = p[0];
                q[1] = p[1];
                q[2] = p[2];
            }
            q[3] = 255;
        }
    }

    // single-layer fill mask: overlapping boxes tint once
    std::vector<std::uint8_t> fill(static_cast<std::size_t>(w) * h, 0);
    std::vector<std::uint8_t> border(fill.size(), 0);
    for (const auto& rec : report.pairs) {
        if (rec.verdict != matching::Verdict::PotentialIncompatibility) continue;
        const std::optional<Box>& bbox = rec.test_bbox ? rec.test_bbox : rec.baseline_bbox;
        if (!bbox) continue;
        const int x0 = std::clamp(bbox->x, 0, w);
        const int y0 = std::clamp(bbox->y, 0, h);
        const int x1 = std::clamp(bbox->right(), 0, w);
        const int y1 = std::clamp(bbox->bottom(), 0, h);
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                fill[i] = 1;
                const bool edge = x - x0 < 2 || x1 - 1 - x < 2 || y - y0 < 2 || y1 - 1 - y < 2;
                if (edge) border[i] = 1;
            }
    }

    constexpr double alpha = 96.0 / 255.0;
    for (int y = 0; y < h; ++y) {
        std::uint8_t* dst = out.row(y);
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            std::uint8_t* q = dst + static_cast<std::size_t>(x) * 4;
            if (border[i]) {
                q[0] = 255;
                q[1] = 0;
                q[2] = 0;
            } else if (fill[i]) {
                q[0] = static_cast<std::uint8_t>(std::lround(q[0] * (1.0 - alpha) + 255.0 * alpha));
                q[1] = static_cast<std::uint8_t>(std::lround(q[1] * (1.0 - alpha)));
                q[2] = static_cast<std::uint8_t>(std::lround(q[2] * (1.0 - alpha)));
            }
        }
    }
    return out;
}

namespace {

using nlohmann::json;

json box_to_json(const Box& b) { return json{{"x", b.x}, {"y", b.y}, {"w", b.width}, {"h", b.height}}; }

Box box_from_json(const json& j) {
    return Box{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(),
               j.at("h").get<int>()};
}

std::string verdict_name(matching::Verdict v) {
    return v == matching::Verdict::Compatible ? "compatible" : "potential_incompatibility";
}

matching::Verdict verdict_from(const std::string& s) {
    if (s == "compatible") return matching::Verdict::Compatible;
    if (s == "potential_incompatibility" || s == "incompatible")
        return matching::Verdict::PotentialIncompatibility;
    throw FormatError("unknown verdict: " + s);
}

json config_to_json(const PipelineConfig& cfg) {
    return json{
        {"segmentation",
         {{"max_dilation_extent", cfg.seg.max_dilation_extent},
          {"min_dilation_extent", cfg.seg.min_dilation_extent},
          {"max_roi_side", cfg.seg.max_roi_side},
          {"h_extent_scale", cfg.seg.h_extent_scale},
          {"v_extent_scale", cfg.seg.v_extent_scale},
          {"harris_sigma", cfg.seg.harris.window_sigma},
          {"harris_k", cfg.seg.harris.k},
          {"harris_threshold", cfg.seg.harris.rel_threshold},
          {"harris_kernel",
           cfg.seg.harris.kernel == imaging::GradientKernel::Sobel ? "sobel" : "scharr"}}},
        {"match",
         {{"centroid_tol", cfg.match.centroid_tol},
          {"size_tol", cfg.match.size_tol},
          {"orientation_tol", cfg.match.orientation_tol},
          {"search_tolerance", cfg.match.search_tolerance},
          {"ssd_threshold", cfg.match.ssd_threshold}}},
        {"config_index", cfg.config_index}};
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig cfg;
    const json& s = j.at("segmentation");
    cfg.seg.max_dilation_extent = s.at("max_dilation_extent").get<int>();
    cfg.seg.min_dilation_extent = s.at("min_dilation_extent").get<int>();
    cfg.seg.max_roi_side = s.at("max_roi_side").get<int>();
    cfg.seg.h_extent_scale = s.at("h_extent_scale").get<double>();
    cfg.seg.v_extent_scale = s.at("v_extent_scale").get<double>();
    cfg.seg.harris.window_sigma = s.at("harris_sigma").get<double>();
    cfg.seg.harris.k = s.at("harris_k").get<double>();
    cfg.seg.harris.rel_threshold = s.at("harris_threshold").get<double>();
    cfg.seg.harris.kernel = s.at("harris_kernel").get<std::string>() == "scharr"
                                ? imaging::GradientKernel::Scharr
                                : imaging::GradientKernel::Sobel;
    const json& m = j.at("match");
    cfg.match.centroid_tol = m.at("centroid_tol").get<double>();
    cfg.match.size_tol = m.at("size_tol").get<double>();
    cfg.match.orientation_tol = m.at("orientation_tol").get<double>();
    cfg.match.search_tolerance = m.at("search_tolerance").get<int>();
    cfg.match.ssd_threshold = m.at("ssd_threshold").get<double>();
    cfg.config_index = j.at("config_index").get<int>();
    return cfg;
}

} // namespace

std::string report_to_json(const ComparisonReport& report, bool include_timings) {
    json pairs = json::array();
    for (const auto& rec : report.pairs) {
        json jp;
        jp["baseline_bbox"] = rec.baseline_bbox ? box_to_json(*rec.baseline_bbox) : json(nullptr);
        jp["test_bbox"] = rec.test_bbox ? box_to_json(*rec.test_bbox) : json(nullptr);
        jp["matched_exact"] = rec.matched_exact;
        jp["ssd_norm"] = rec.ssd_norm ? json(*rec.ssd_norm) : json(nullptr);
        jp["offset"] = rec.offset ? json::array({rec.offset->first, rec.offset->second})
                                  : json(nullptr);
        jp["correlation"] = rec.correlation;
        jp["bare_verdict"] = verdict_name(rec.bare_verdict);
        jp["verdict"] = verdict_name(rec.verdict);
        jp["classifier_class"] =
            rec.classifier_class ? json(*rec.classifier_class) : json(nullptr);
        jp["classifier_probability"] =
            rec.classifier_probability ? json(*rec.classifier_probability) : json(nullptr);
        pairs.push_back(std::move(jp));
    }

    json j{{"schema_version", report.schema_version},
           {"tool_version", report.tool_version},
           {"verdict", report.verdict == matching::Verdict::Compatible ? "compatible"
                                                                       : "incompatible"},
           {"mismatch_density", report.mismatch_density},
           {"unmatched_test_rois", report.unmatched_test},
           {"total_test_rois", report.total_test},
           {"classifier_applied", report.classifier_applied},
           {"pairs", std::move(pairs)},
           {"config", config_to_json(report.config)}};
    if (include_timings) {
        j["timings_ms"] = {{"segmentation", report.timings.segmentation_ms},
                           {"features", report.timings.features_ms},
                           {"matching", report.timings.matching_ms},
                           {"fallback", report.timings.fallback_ms},
                           {"classify", report.timings.classify_ms},
                           {"total", report.timings.total_ms}};
    }
    return j.dump(2) + "\n";
}

ComparisonReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("report JSON parse error: ") + e.what());
    }
    ComparisonReport r;
    r.schema_version = j.at("schema_version").get<int>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.verdict = verdict_from(j.at("verdict").get<std::string>());
    r.mismatch_density = j.at("mismatch_density").get<double>();
    r.unmatched_test = j.at("unmatched_test_rois").get<std::size_t>();
    r.total_test = j.at("total_test_rois").get<std::size_t>();
    r.classifier_applied = j.at("classifier_applied").get<bool>();
    r.config = config_from_json(j.at("config"));
    for (const auto& jp : j.at("pairs")) {
        PairRecord rec;
        if (!jp.at("baseline_bbox").is_null()) rec.baseline_bbox = box_from_json(jp.at("baseline_bbox"));
        if (!jp.at("test_bbox").is_null()) rec.test_bbox = box_from_json(jp.at("test_bbox"));
        rec.matched_exact = jp.at("matched_exact").get<bool>();
        if (!jp.at("ssd_norm").is_null()) rec.ssd_norm = jp.at("ssd_norm").get<double>();
        if (!jp.at("offset").is_null())
            rec.offset = std::make_pair(jp.at("offset")[0].get<int>(), jp.at("offset")[1].get<int>());
        rec.correlation = jp.at("correlation").get<double>();
        rec.bare_verdict = verdict_from(jp.at("bare_verdict").get<std::string>());
        rec.verdict = verdict_from(jp.at("verdict").get<std::string>());
        if (!jp.at("classifier_class").is_null())
            rec.classifier_class = jp.at("classifier_class").get<int>();
        if (!jp.at("classifier_probability").is_null())
            rec.classifier_probability = jp.at("classifier_probability").get<double>();
        r.pairs.push_back(std::move(rec));
    }
    if (j.contains("timings_ms")) {
        const json& t = j.at("timings_ms");
        r.timings.segmentation_ms = t.at("segmentation").get<double>();
        r.timings.features_ms = t.at("features").get<double>();
        r.timings.matching_ms = t.at("matching").get<double>();
        r.timings.fallback_ms = t.at("fallback").get<double>();
        r.timings.classify_ms = t.at("classify").get<double>();
        r.timings.total_ms = t.at("total").get<double>();
    }
    return r;
}

bool reports_equal_ignoring_timings(const ComparisonReport& a, const ComparisonReport& b) {
    return report_to_json(a, false) == report_to_json(b, false);
}

} // namespace roidiff::pipeline
