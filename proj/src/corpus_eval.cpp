#include "roidiff/corpus_eval.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "roidiff/png_io.hpp"

namespace roidiff::corpus_eval {

namespace {

using nlohmann::json;

json oracle_to_json(const synth::ElementOracle& o) {
    json j{{"kind", synth::kind_name(o.kind)},
           {"label", o.label == synth::OracleLabel::Incompatibility ? "incompatibility"
                                                                    : "false_positive"},
           {"base_bbox", {{"x", o.base_bbox.x},
                          {"y", o.base_bbox.y},
                          {"w", o.base_bbox.width},
                          {"h", o.base_bbox.height}}}};
    if (o.test_bbox)
        j["test_bbox"] = {{"x", o.test_bbox->x},
                          {"y", o.test_bbox->y},
                          {"w", o.test_bbox->width},
                          {"h", o.test_bbox->height}};
    else
        j["test_bbox"] = nullptr;
    return j;
}

synth::ElementOracle oracle_from_json(const json& j) {
    synth::ElementOracle o;
    o.kind = synth::kind_from_name(j.at("kind").get<std::string>());
    o.label = j.at("label").get<std::string>() == "incompatibility"
                  ? synth::OracleLabel::Incompatibility
                  : synth::OracleLabel::FalsePositive;
    const json& b = j.at("base_bbox");
    o.base_bbox = Box{b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(),
                      b.at("h").get<int>()};
    if (!j.at("test_bbox").is_null()) {
        const json& t = j.at("test_bbox");
        o.test_bbox = Box{t.at("x").get<int>(), t.at("y").get<int>(), t.at("w").get<int>(),
                          t.at("h").get<int>()};
    }
    return o;
}

std::string pair_name(int id, const char* side) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "pair_%04d_%s.png", id, side);
    return buf;
}

// A flagged pair covers an oracle element when any of its bboxes overlaps
// any of the element's bboxes.
bool flag_covers(const pipeline::PairRecord& rec, const synth::ElementOracle& o) {
    const Box* flag_boxes[2] = {rec.baseline_bbox ? &*rec.baseline_bbox : nullptr,
                                rec.test_bbox ? &*rec.test_bbox : nullptr};
    const Box* elem_boxes[2] = {&o.base_bbox, o.test_bbox ? &*o.test_bbox : nullptr};
    for (const Box* f : flag_boxes) {
        if (!f) continue;
        for (const Box* e : elem_boxes)
            if (e && f->intersects(*e)) return true;
    }
    return false;
}

struct PairOutcome {
    pipeline::ComparisonReport bare;
    std::optional<pipeline::ComparisonReport> filtered;
};

// Index-ordered parallel map: output order is independent of scheduling.
std::vector<PairOutcome> run_pipeline(const std::vector<LoadedPair>& pairs,
                                      const pipeline::PipelineConfig& cfg,
                                      const classifier::Model* model, int threads) {
    std::vector<PairOutcome> out(pairs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pairs.size()) return;
            pipeline::PipelineConfig pair_cfg = cfg;
            pair_cfg.config_index = pairs[i].config_index;
            out[i].bare = pipeline::compare_pages(pairs[i].baseline, pairs[i].under_test, pair_cfg);
            if (model)
                out[i].filtered = pipeline::compare_pages(pairs[i].baseline, pairs[i].under_test,
                                                          pair_cfg, model);
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(pairs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

void score_pair(const LoadedPair& pair, const pipeline::ComparisonReport& report, Counts& c) {
    ++c.pages;
    bool page_defective = false;
    for (const auto& o : pair.oracle) {
        if (o.label != synth::OracleLabel::Incompatibility) continue;
        page_defective = true;
        ++c.defects;
        bool detected = false;
        for (const auto& rec : report.pairs) {
            if (rec.verdict != matching::Verdict::PotentialIncompatibility) continue;
            if (flag_covers(rec, o)) { detected = true; break; }
        }
        c.defects_detected += detected;
    }
    for (const auto& rec : report.pairs) {
        if (rec.verdict != matching::Verdict::PotentialIncompatibility) continue;
        ++c.flags;
        for (const auto& o : pair.oracle) {
            if (o.label == synth::OracleLabel::Incompatibility && flag_covers(rec, o)) {
                ++c.flags_on_defect;
                break;
            }
        }
    }
    const bool flagged_page = report.verdict == matching::Verdict::PotentialIncompatibility;
    if (page_defective && flagged_page) ++c.page_true_positive;
    if (page_defective && !flagged_page) ++c.page_false_negative;
    if (!page_defective && flagged_page) ++c.page_false_positive;
    if (!page_defective && !flagged_page) ++c.page_true_negative;
}

} // namespace

void write_corpus(const std::string& outdir, const std::vector<synth::CorpusPair>& corpus) {
    std::filesystem::create_directories(outdir);
    const std::filesystem::path dir(outdir);

    json entries = json::array();
    for (const auto& pair : corpus) {
        const std::string base_name = pair_name(pair.id, "base");
        const std::string test_name = pair_name(pair.id, "test");
        write_png((dir / base_name).string(), synth::render(pair.baseline));
        write_png((dir / test_name).string(), synth::render(pair.under_test));

        json oracle = json::array();
        for (const auto& o : pair.oracle) oracle.push_back(oracle_to_json(o));
        entries.push_back({{"id", pair.id},
                           {"config_index", pair.config_index},
                           {"baseline", base_name},
                           {"under_test", test_name},
                           {"oracle", std::move(oracle)}});
    }
    const json manifest{{"schema_version", 1}, {"pairs", std::move(entries)}};

    const std::filesystem::path target = dir / "manifest.json";
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create manifest: " + tmp.string());
        out << manifest.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, target);
}

std::vector<LoadedPair> load_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest: " + manifest_path);
    std::stringstream buf;
    buf << in.rdbuf();
    json manifest;
    try {
        manifest = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest parse error: ") + e.what());
    }
    if (manifest.value("schema_version", -1) != 1)
        throw FormatError("unsupported manifest schema version");

    const std::filesystem::path dir = std::filesystem::path(manifest_path).parent_path();
    std::vector<LoadedPair> pairs;
    for (const auto& e : manifest.at("pairs")) {
        LoadedPair p;
        p.id = e.at("id").get<int>();
        p.config_index = e.value("config_index", 1);
        p.baseline = read_png((dir / e.at("baseline").get<std::string>()).string());
        p.under_test = read_png((dir / e.at("under_test").get<std::string>()).string());
        for (const auto& jo : e.at("oracle")) p.oracle.push_back(oracle_from_json(jo));
        pairs.push_back(std::move(p));
    }
    return pairs;
}

std::vector<LoadedPair> materialize(const std::vector<synth::CorpusPair>& corpus) {
    std::vector<LoadedPair> pairs;
    pairs.reserve(corpus.size());
    for (const auto& cp : corpus) {
        LoadedPair p;
        p.id = cp.id;
        p.config_index = cp.config_index;
        p.baseline = synth::render(cp.baseline);
        p.under_test = synth::render(cp.under_test);
        p.oracle = cp.oracle;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

EvalResult evaluate(const std::vector<LoadedPair>& pairs, const pipeline::PipelineConfig& cfg,
                    const classifier::Model* model, int threads) {
    const auto outcomes = run_pipeline(pairs, cfg, model, threads);
    EvalResult result;
    if (model) result.filtered = Counts{};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        score_pair(pairs[i], outcomes[i].bare, result.bare);
        if (model) score_pair(pairs[i], *outcomes[i].filtered, *result.filtered);
    }
    return result;
}

std::vector<classifier::LabeledSample> extract_labeled_samples(
    const std::vector<LoadedPair>& pairs, const pipeline::PipelineConfig& cfg, int threads) {
    const auto outcomes = run_pipeline(pairs, cfg, nullptr, threads);

    std::vector<classifier::LabeledSample> samples;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& report = outcomes[i].bare;
        const Raster gray_base = imaging::to_grayscale(pairs[i].baseline);
        const Raster gray_test = imaging::to_grayscale(pairs[i].under_test);
        for (const auto& rec : report.pairs) {
            if (rec.verdict != matching::Verdict::PotentialIncompatibility) continue;

            classifier::FeatureVector17 fv;
            fv.correlation = rec.correlation;
            const auto& bbox = rec.baseline_bbox ? rec.baseline_bbox : rec.test_bbox;
            fv.x = bbox->x;
            fv.y = bbox->y;
            fv.w = bbox->width;
            fv.h = bbox->height;
            fv.config_index = pairs[i].config_index;
            fv.mismatch_density = report.mismatch_density;
            // histogram of the flagged window, recomputed from the page
            const Raster& gray = rec.baseline_bbox ? gray_base : gray_test;
            Box clipped = *bbox;
            clipped.width = std::min(clipped.width, gray.width() - clipped.x);
            clipped.height = std::min(clipped.height, gray.height() - clipped.y);
            fv.histogram = imaging::histogram10(gray.crop(clipped));

            int binary = 0;
            int severity = 0;
            for (const auto& o : pairs[i].oracle) {
                if (!flag_covers(rec, o)) continue;
                binary |= o.label == synth::OracleLabel::Incompatibility;
                severity = std::max(severity, synth::severity_class(o.kind, o.label));
            }
            classifier::LabeledSample s;
            s.features = fv;
            s.binary_label = binary;
            s.quaternary_label = severity;
            samples.push_back(std::move(s));
        }
    }
    return samples;
}

pipeline::PipelineConfig synthetic_eval_config() {
    pipeline::PipelineConfig cfg;
    cfg.seg.harris.rel_threshold = 0.005;
    cfg.match.centroid_tol = 2.0;
    cfg.match.size_tol = 2.0;
    cfg.match.ssd_threshold = 0.004;
    return cfg;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ROIDIFF_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

} // namespace roidiff::corpus_eval
