#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "roidiff/matching.hpp"

using namespace roidiff;
using namespace roidiff::matching;

namespace {

features::AnalyzedRoi make_aroi(int id, const Box& bbox, const Raster& window,
                                segmentation::PageSource src) {
    segmentation::Roi roi;
    roi.id = id;
    roi.bbox = bbox;
    roi.window = window;
    roi.source = src;
    return {roi, features::extract_features(roi)};
}

std::vector<features::AnalyzedRoi> rois_on_page(const Raster& page, const std::vector<Box>& boxes,
                                                segmentation::PageSource src) {
    std::vector<features::AnalyzedRoi> out;
    int id = 0;
    for (const Box& b : boxes) out.push_back(make_aroi(id++, b, page.crop(b), src));
    return out;
}

Raster page_with_blobs(std::mt19937& rng, int w, int h, const std::vector<Box>& boxes) {
    Raster page(w, h, 1, 0);
    for (const Box& b : boxes)
        for (int y = b.y; y < b.bottom(); ++y)
            for (int x = b.x; x < b.right(); ++x)
                page.at(x, y) = static_cast<std::uint8_t>(100 + rng() % 120);
    return page;
}

} // namespace

TEST_SUITE("matching.match_rois") {
    TEST_CASE("identical lists match completely") {
        std::mt19937 rng(1);
        const std::vector<Box> boxes{{10, 10, 30, 20}, {80, 40, 25, 25}, {20, 90, 40, 15}};
        const Raster page = page_with_blobs(rng, 160, 130, boxes);
        const auto base = rois_on_page(page, boxes, segmentation::PageSource::Baseline);
        const auto test = rois_on_page(page, boxes, segmentation::PageSource::UnderTest);

        const MatchSet ms = match_rois(base, test, {});
        CHECK(ms.verdicts.size() == 3);
        for (const auto& pv : ms.verdicts) {
            CHECK(pv.matched_exact);
            CHECK(pv.correlation == doctest::Approx(1.0));
        }
        CHECK(ms.unmatched_test == 0);
        CHECK(ms.mismatch_density == 0.0);
    }

    TEST_CASE("a 60 px translation breaks the exact match") {
        std::mt19937 rng(2);
        const std::vector<Box> base_boxes{{10, 10, 30, 20}};
        const std::vector<Box> test_boxes{{70, 10, 30, 20}};
        const Raster page = page_with_blobs(rng, 160, 60, base_boxes);
        Raster page2(160, 60, 1, 0);
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 30; ++x)
                page2.at(70 + x, 10 + y) = page.at(10 + x, 10 + y);

        const MatchSet ms = match_rois(rois_on_page(page, base_boxes, segmentation::PageSource::Baseline),
                                       rois_on_page(page2, test_boxes, segmentation::PageSource::UnderTest),
                                       {});
        REQUIRE(ms.verdicts.size() == 2); // unmatched base + unmatched test
        CHECK_FALSE(ms.verdicts[0].matched_exact);
        CHECK(ms.unmatched_test == 1);
    }

    TEST_CASE("one extra test ROI drives the mismatch density") {
        std::mt19937 rng(3);
        const std::vector<Box> base_boxes{{10, 10, 20, 20}, {60, 10, 20, 20}, {110, 10, 20, 20}};
        std::vector<Box> test_boxes = base_boxes;
        test_boxes.push_back(Box{60, 60, 20, 20});
        const Raster page = page_with_blobs(rng, 160, 100, test_boxes);

        const MatchSet ms = match_rois(rois_on_page(page, base_boxes, segmentation::PageSource::Baseline),
                                       rois_on_page(page, test_boxes, segmentation::PageSource::UnderTest),
                                       {});
        CHECK(ms.unmatched_test == 1);
        CHECK(ms.total_test == 4);
        CHECK(ms.mismatch_density == doctest::Approx(0.25));
    }

    TEST_CASE("matching is one-to-one") {
        std::mt19937 rng(4);
        const std::vector<Box> boxes{{10, 10, 20, 20}, {14, 12, 20, 20}, {60, 40, 20, 20}};
        const Raster page = page_with_blobs(rng, 120, 90, boxes);
        const auto base = rois_on_page(page, boxes, segmentation::PageSource::Baseline);
        const auto test = rois_on_page(page, boxes, segmentation::PageSource::UnderTest);
        const MatchSet ms = match_rois(base, test, {});

        std::vector<int> seen_b, seen_t;
        for (const auto& pv : ms.verdicts) {
            if (pv.roib) seen_b.push_back(pv.roib->roi.id);
            if (pv.roit) seen_t.push_back(pv.roit->roi.id);
        }
        std::sort(seen_b.begin(), seen_b.end());
        std::sort(seen_t.begin(), seen_t.end());
        CHECK(std::adjacent_find(seen_b.begin(), seen_b.end()) == seen_b.end());
        CHECK(std::adjacent_find(seen_t.begin(), seen_t.end()) == seen_t.end());
    }
}

TEST_SUITE("matching.ssd_fallback") {
    TEST_CASE("unshifted content scores zero at offset zero") {
        std::mt19937 rng(5);
        const Box bbox{40, 30, 24, 16};
        const Raster page = page_with_blobs(rng, 120, 90, {bbox});
        const auto roi = make_aroi(0, bbox, page.crop(bbox), segmentation::PageSource::Baseline);

        const FallbackResult r = ssd_fallback(roi.roi, page, {});
        CHECK(r.region_valid);
        CHECK(r.best_ssd_norm == 0.0);
        CHECK(r.best_dx == 0);
        CHECK(r.best_dy == 0);
        CHECK(r.correlation == doctest::Approx(1.0));
    }

    TEST_CASE("content shifted by half the tolerance is found at that offset") {
        std::mt19937 rng(6);
        MatchParams p;
        const int shift = p.search_tolerance / 2; // 20
        const Box bbox{50, 30, 20, 12};
        const Raster base_page = page_with_blobs(rng, 160, 80, {bbox});
        Raster test_page(160, 80, 1, 0);
        for (int y = 0; y < bbox.height; ++y)
            for (int x = 0; x < bbox.width; ++x)
                test_page.at(bbox.x + shift + x, bbox.y + y) = base_page.at(bbox.x + x, bbox.y + y);

        const auto roi = make_aroi(0, bbox, base_page.crop(bbox), segmentation::PageSource::Baseline);
        const FallbackResult r = ssd_fallback(roi.roi, test_page, p);
        CHECK(r.best_ssd_norm == 0.0);
        CHECK(r.best_dx == shift);
        CHECK(r.best_dy == 0);
    }

    TEST_CASE("missing content scores the normalized template energy") {
        std::mt19937 rng(7);
        const Box bbox{40, 30, 10, 10};
        const Raster base_page = page_with_blobs(rng, 120, 90, {bbox});
        const Raster black(120, 90, 1, 0);

        const auto roi = make_aroi(0, bbox, base_page.crop(bbox), segmentation::PageSource::Baseline);
        const FallbackResult r = ssd_fallback(roi.roi, black, {});

        double energy = 0.0;
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 10; ++x) {
                const double v = roi.roi.window.at(x, y);
                energy += v * v;
            }
        CHECK(r.best_ssd_norm == doctest::Approx(energy / (100.0 * 255.0 * 255.0)));
        CHECK(r.correlation == 0.0); // flat region, nonzero difference
    }

    TEST_CASE("clipped-out region reports maximal distance") {
        const Box bbox{0, 0, 20, 20};
        Raster window(20, 20, 1, 150);
        const auto roi = make_aroi(0, bbox, window, segmentation::PageSource::Baseline);
        const Raster small_page(30, 8, 1, 0); // shorter than the ROI
        const FallbackResult r = ssd_fallback(roi.roi, small_page, {});
        CHECK_FALSE(r.region_valid);
        CHECK(r.best_ssd_norm == 1.0);

        PairVerdict pv;
        pv.roib = roi;
        pv.fallback = r;
        CHECK(pair_verdict(pv, {}) == Verdict::PotentialIncompatibility);
    }

    TEST_CASE("scan equals exhaustive brute force on random instances") {
        std::mt19937 rng(8);
        for (int iter = 0; iter < 50; ++iter) {
            MatchParams p;
            p.search_tolerance = 4 + static_cast<int>(rng() % 12);
            const int tw = 3 + static_cast<int>(rng() % 10);
            const int th = 3 + static_cast<int>(rng() % 10);
            const int px = static_cast<int>(rng() % 15);
            const int py = static_cast<int>(rng() % 15);
            const Box bbox{px, py, tw, th};
            const Raster page = oracles::random_gray(rng, 32, 32);
            const Raster other = oracles::random_gray(rng, 32, 32);

            const auto roi = make_aroi(0, bbox, page.crop(bbox), segmentation::PageSource::Baseline);
            const FallbackResult r = ssd_fallback(roi.roi, other, p);
            REQUIRE(r.region_valid);

            const int d = p.search_tolerance;
            const int x0 = std::max(0, px - d / 2);
            const int y0 = std::max(0, py - d / 2);
            const int x1 = std::min(32, px - d / 2 + tw + d);
            const int y1 = std::min(32, py - d / 2 + th + d);
            const auto oracle = oracles::ssd_scan_bruteforce(roi.roi.window, other, x0, y0, x1, y1);
            CHECK(r.best_ssd_norm ==
                  doctest::Approx(static_cast<double>(oracle.best) / (tw * th * 65025.0)));
            CHECK(r.best_dx == oracle.x - px);
            CHECK(r.best_dy == oracle.y - py);
        }
    }
}

TEST_SUITE("matching.verdicts") {
    TEST_CASE("pair verdict basics") {
        MatchParams p;
        PairVerdict exact;
        exact.matched_exact = true;
        CHECK(pair_verdict(exact, p) == Verdict::Compatible);

        PairVerdict zero;
        zero.fallback = FallbackResult{0.0, 0, 0, 1.0, true};
        CHECK(pair_verdict(zero, p) == Verdict::Compatible);

        PairVerdict bad;
        bad.fallback = FallbackResult{1.0, 0, 0, 0.0, true};
        CHECK(pair_verdict(bad, p) == Verdict::PotentialIncompatibility);
    }

    TEST_CASE("raising the threshold never flips compatible to incompatible") {
        std::mt19937 rng(9);
        for (int iter = 0; iter < 100; ++iter) {
            PairVerdict pv;
            pv.fallback = FallbackResult{static_cast<double>(rng() % 1000) / 1000.0, 0, 0, 0.5, true};
            MatchParams lo, hi;
            lo.ssd_threshold = 0.2;
            hi.ssd_threshold = 0.7;
            if (pair_verdict(pv, lo) == Verdict::Compatible)
                CHECK(pair_verdict(pv, hi) == Verdict::Compatible);
        }
    }

    TEST_CASE("page verdict aggregates pairs") {
        MatchSet ms;
        CHECK(page_verdict(ms) == Verdict::Compatible); // vacuous

        PairVerdict ok;
        ok.verdict = Verdict::Compatible;
        ms.verdicts.push_back(ok);
        CHECK(page_verdict(ms) == Verdict::Compatible);

        PairVerdict bad;
        bad.verdict = Verdict::PotentialIncompatibility;
        ms.verdicts.push_back(bad);
        CHECK(page_verdict(ms) == Verdict::PotentialIncompatibility);
    }
}
