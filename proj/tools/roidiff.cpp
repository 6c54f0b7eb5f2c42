/**
 * @file roidiff.cpp
 * @brief Command-line driver: compare, segment, train, label, synth, eval.
 *
 * Exit codes for CI: 0 success / compatible, 1 incompatible, 2 error.
 */
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "roidiff/config.hpp"
#include "roidiff/corpus_eval.hpp"
#include "roidiff/dataset.hpp"
#include "roidiff/png_io.hpp"
#include "roidiff/version.hpp"

namespace fs = std::filesystem;
using namespace roidiff;

namespace {

constexpr int kExitCompatible = 0;
constexpr int kExitIncompatible = 1;
constexpr int kExitError = 2;

void atomic_write(const fs::path& target, const std::string& text) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create " + tmp.string());
        out << text;
    }
    fs::rename(tmp, target);
}

struct CommonOpts {
    std::string config_path;
    std::string model_path;
    std::string out_dir = ".";
    std::uint32_t seed = 0;
    bool seed_set = false;
    bool debug_images = false;
};

RunConfig resolve_config(const CommonOpts& opts) {
    RunConfig cfg;
    if (!opts.config_path.empty()) cfg = RunConfig::load(opts.config_path);
    if (opts.seed_set) cfg.seed = opts.seed;
    if (!opts.model_path.empty()) cfg.model_path = opts.model_path;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_model = true) {
    cmd->add_option("--config", opts.config_path, "key = value config file");
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    auto* seed = cmd->add_option("--seed", opts.seed, "deterministic seed");
    seed->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_flag("--debug-images", opts.debug_images, "write intermediate images");
    if (with_model)
        cmd->add_option("--model", opts.model_path, "classifier model JSON (filters verdicts)");
}

Raster overlay_source(const std::string& path) { return read_png(path); }

void print_metrics_table(const std::string& title, const corpus_eval::Counts& c) {
    std::cout << title << ":\n"
              << "  pair-level  precision " << std::fixed << std::setprecision(4)
              << c.pair_precision() << "  recall " << c.pair_recall() << "  F "
              << c.pair_f_score() << "  (flags " << c.flags << ", defects " << c.defects << ")\n"
              << "  page-level  accuracy " << c.page_accuracy() << "  (TP "
              << c.page_true_positive << " FP " << c.page_false_positive << " FN "
              << c.page_false_negative << " TN " << c.page_true_negative << ")\n";
}

void print_cv_table(const classifier::EvalMetrics& em, classifier::Target target) {
    std::cout << std::fixed << std::setprecision(4);
    std::cout << "class            precision  recall     F-score\n";
    for (std::size_t c = 0; c < em.per_class.size(); ++c) {
        std::cout << std::left << std::setw(17)
                  << classifier::class_name(target, static_cast<int>(c)) << std::right
                  << std::setw(9) << em.per_class[c].precision << std::setw(10)
                  << em.per_class[c].recall << std::setw(11) << em.per_class[c].f_score << "\n";
    }
    std::cout << "mean training time per fold: " << em.mean_training_seconds << " s\n";
}

// ---------------------------------------------------------------------------

int cmd_compare(const std::string& baseline_path, const std::string& test_path,
                const CommonOpts& opts, bool timings) {
    const RunConfig cfg = resolve_config(opts);

    const Raster baseline = read_png(baseline_path);
    const Raster under_test = read_png(test_path);

    std::optional<classifier::Model> model;
    if (!cfg.model_path.empty()) model = classifier::load_model(cfg.model_path);

    const pipeline::ComparisonReport report = pipeline::compare_pages(
        baseline, under_test, cfg.pipeline, model ? &*model : nullptr);

    fs::create_directories(opts.out_dir);
    atomic_write(fs::path(opts.out_dir) / "report.json",
                 pipeline::report_to_json(report, timings));
    write_png((fs::path(opts.out_dir) / "overlay.png").string(),
              pipeline::render_overlay(under_test, report));

    if (opts.debug_images) {
        const Raster gray = imaging::to_grayscale(under_test);
        int i = 0;
        for (const auto& rec : report.pairs) {
            if (rec.verdict != matching::Verdict::PotentialIncompatibility) continue;
            const auto& bbox = rec.test_bbox ? rec.test_bbox : rec.baseline_bbox;
            if (!bbox || bbox->x < 0 || bbox->y < 0 || bbox->right() > gray.width() ||
                bbox->bottom() > gray.height())
                continue;
            char name[48];
            std::snprintf(name, sizeof(name), "flag_%04d.png", i++);
            write_png((fs::path(opts.out_dir) / name).string(), gray.crop(*bbox));
        }
    }

    const bool incompatible = report.verdict == matching::Verdict::PotentialIncompatibility;
    std::cout << "verdict: " << (incompatible ? "incompatible" : "compatible")
              << "  MD=" << report.mismatch_density
              << "  flagged=" << report.incompatibility_count() << "\n";
    std::cout << "stage timings (ms): segmentation " << report.timings.segmentation_ms
              << ", features " << report.timings.features_ms << ", matching "
              << report.timings.matching_ms << ", fallback " << report.timings.fallback_ms
              << ", classify " << report.timings.classify_ms << ", total "
              << report.timings.total_ms << "\n";
    return incompatible ? kExitIncompatible : kExitCompatible;
}

int cmd_segment(const std::string& page_path, const CommonOpts& opts) {
    const RunConfig cfg = resolve_config(opts);
    const Raster page = read_png(page_path);
    const Raster gray = imaging::to_grayscale(page);

    std::vector<segmentation::SegmentIteration> trace;
    const auto rois = segmentation::segment(gray, cfg.pipeline.seg,
                                            segmentation::PageSource::UnderTest,
                                            opts.debug_images ? &trace : nullptr);

    nlohmann::json out{{"schema_version", 1}, {"page", page_path}};
    nlohmann::json list = nlohmann::json::array();
    for (const auto& roi : rois)
        list.push_back({{"id", roi.id},
                        {"x", roi.bbox.x},
                        {"y", roi.bbox.y},
                        {"w", roi.bbox.width},
                        {"h", roi.bbox.height}});
    out["rois"] = std::move(list);
    const auto inv = segmentation::roi_inventory(rois);
    out["summary"] = {{"count", inv.count}, {"max_side", inv.max_side}, {"total_area", inv.total_area}};

    fs::create_directories(opts.out_dir);
    atomic_write(fs::path(opts.out_dir) / "rois.json", out.dump(2) + "\n");

    if (opts.debug_images) {
        for (const auto& it : trace) {
            Raster mask_img(it.dilated.width(), it.dilated.height(), 1, 0);
            for (int y = 0; y < mask_img.height(); ++y)
                for (int x = 0; x < mask_img.width(); ++x)
                    if (it.dilated.get(x, y)) mask_img.at(x, y) = 255;
            char name[48];
            std::snprintf(name, sizeof(name), "dilated_extent_%02d.png", it.extent);
            write_png((fs::path(opts.out_dir) / name).string(), mask_img);
        }
        // ROI outlines over the page
        Raster outline(gray.width(), gray.height(), 3);
        for (int y = 0; y < gray.height(); ++y)
            for (int x = 0; x < gray.width(); ++x)
                for (int c = 0; c < 3; ++c) outline.at(x, y, c) = gray.at(x, y);
        for (const auto& roi : rois) {
            const Box& b = roi.bbox;
            for (int x = b.x; x < b.right(); ++x) {
                outline.at(x, b.y, 1) = 255;
                outline.at(x, b.bottom() - 1, 1) = 255;
                outline.at(x, b.y, 0) = outline.at(x, b.y, 2) = 0;
                outline.at(x, b.bottom() - 1, 0) = outline.at(x, b.bottom() - 1, 2) = 0;
            }
            for (int y = b.y; y < b.bottom(); ++y) {
                outline.at(b.x, y, 1) = 255;
                outline.at(b.right() - 1, y, 1) = 255;
                outline.at(b.x, y, 0) = outline.at(b.x, y, 2) = 0;
                outline.at(b.right() - 1, y, 0) = outline.at(b.right() - 1, y, 2) = 0;
            }
        }
        write_png((fs::path(opts.out_dir) / "roi_outlines.png").string(), outline);
    }

    std::cout << "rois: " << inv.count << "  max side: " << inv.max_side
              << "  covered area: " << inv.total_area << " px\n";
    return kExitCompatible;
}

int cmd_train(const std::string& csv_path, const std::string& model_kind,
              const std::string& target_name, int hidden, std::uint32_t seed, int folds,
              const std::string& out_path) {
    const classifier::Target target = target_name == "quaternary"
                                          ? classifier::Target::Quaternary
                                          : classifier::Target::Binary;
    const auto samples = classifier::load_samples_csv(csv_path);
    if (samples.empty()) throw FormatError("training CSV has no samples");

    classifier::Model model;
    classifier::Trainer trainer;
    if (model_kind == "tree") {
        trainer = classifier::make_tree_trainer(target);
        model = classifier::train_tree(samples, target);
    } else if (model_kind == "nn") {
        classifier::NNParams params;
        params.hidden_neurons = hidden;
        params.seed = seed;
        trainer = classifier::make_nn_trainer(target, params);
        model = classifier::train_nn(samples, target, params);
    } else {
        throw FormatError("--model must be tree or nn");
    }

    const classifier::EvalMetrics cv =
        classifier::cross_validate(samples, target, folds, trainer, seed);
    std::cout << folds << "-fold cross-validation (" << model_kind << ", " << target_name
              << ", " << samples.size() << " samples):\n";
    print_cv_table(cv, target);

    classifier::save_model(model, out_path);
    std::cout << "model written to " << out_path << "\n";
    return kExitCompatible;
}

int cmd_label(const std::string& pairs_dir, const std::string& out_csv,
              const std::string& rater, bool quaternary) {
    if (!fs::is_directory(pairs_dir)) throw IoError("not a directory: " + pairs_dir);

    // already-rated ids are skipped so a session can resume
    std::set<std::string> rated;
    if (fs::exists(out_csv)) {
        std::ifstream in(out_csv);
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            if (comma != std::string::npos) rated.insert(line.substr(0, comma));
        }
    }

    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(pairs_dir)) {
        if (entry.path().extension() != ".png") continue;
        ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());

    const bool fresh = !fs::exists(out_csv);
    std::ofstream out(out_csv, std::ios::app);
    if (!out) throw IoError("cannot open " + out_csv);
    if (fresh) out << "pair_id,rater_id,class\n";

    std::size_t asked = 0;
    for (const auto& id : ids) {
        if (rated.count(id)) continue;
        for (;;) {
            if (quaternary)
                std::cout << id << " class [1-4, q to stop]: " << std::flush;
            else
                std::cout << id << " label [p/n, q to stop]: " << std::flush;
            std::string reply;
            if (!std::getline(std::cin, reply) || reply == "q") {
                std::cout << "rated " << asked << " pairs\n";
                return kExitCompatible;
            }
            const bool ok = quaternary ? (reply.size() == 1 && reply[0] >= '1' && reply[0] <= '4')
                                       : (reply == "p" || reply == "n");
            if (!ok) {
                std::cout << "  invalid entry, try again\n";
                continue;
            }
            out << id << ',' << rater << ',' << reply << '\n';
            out.flush();
            ++asked;
            break;
        }
    }
    std::cout << "rated " << asked << " pairs\n";
    return kExitCompatible;
}

int cmd_synth(int n, std::uint32_t seed, const std::string& outdir) {
    const auto corpus = synth::gen_corpus(n, seed, synth::default_mix(n));
    corpus_eval::write_corpus(outdir, corpus);
    std::cout << "wrote " << corpus.size() << " page pairs to " << outdir << "\n";
    return kExitCompatible;
}

int cmd_eval(const std::string& manifest_path, const CommonOpts& opts, int threads,
             const std::string& export_csv) {
    const RunConfig cfg = resolve_config(opts);
    const auto pairs = corpus_eval::load_manifest(manifest_path);
    const int workers = corpus_eval::resolve_threads(threads > 0 ? threads : cfg.threads);

    std::optional<classifier::Model> model;
    if (!cfg.model_path.empty()) model = classifier::load_model(cfg.model_path);

    const corpus_eval::EvalResult result =
        corpus_eval::evaluate(pairs, cfg.pipeline, model ? &*model : nullptr, workers);
    print_metrics_table("bare-bones", result.bare);
    if (result.filtered) print_metrics_table("with classifier", *result.filtered);

    if (!export_csv.empty()) {
        const auto samples = corpus_eval::extract_labeled_samples(pairs, cfg.pipeline, workers);
        classifier::save_samples_csv(export_csv, samples);
        std::cout << "exported " << samples.size() << " labeled samples to " << export_csv << "\n";
    }
    return kExitCompatible;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"visual cross-rendering diff tool"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // compare
    auto* compare = app.add_subcommand("compare", "compare two page screenshots");
    std::string baseline_path, test_path;
    CommonOpts compare_opts;
    bool timings = false;
    compare->add_option("baseline", baseline_path, "baseline PNG")->required();
    compare->add_option("test", test_path, "under-test PNG")->required();
    add_common(compare, compare_opts);
    compare->add_flag("--timings", timings, "include stage timings in report.json");

    // segment
    auto* segment = app.add_subcommand("segment", "segment one page into ROIs");
    std::string page_path;
    CommonOpts segment_opts;
    segment->add_option("page", page_path, "page PNG")->required();
    add_common(segment, segment_opts, false);

    // train
    auto* train = app.add_subcommand("train", "train a classifier from a labeled CSV");
    std::string csv_path, model_kind = "nn", target_name = "binary",
                train_out = "model.json";
    int hidden = 11, folds = 5;
    std::uint32_t train_seed = 1;
    train->add_option("dataset", csv_path, "labeled sample CSV")->required();
    train->add_option("--model", model_kind, "tree | nn")->capture_default_str();
    train->add_option("--target", target_name, "binary | quaternary")
        ->check(CLI::IsMember({"binary", "quaternary"}))
        ->capture_default_str();
    train->add_option("--hidden", hidden, "hidden neurons (nn)")->capture_default_str();
    train->add_option("--seed", train_seed, "training seed")->capture_default_str();
    train->add_option("--folds", folds, "cross-validation folds")->capture_default_str();
    train->add_option("--out", train_out, "output model path")->capture_default_str();

    // label
    auto* label = app.add_subcommand("label", "interactively rate exported ROI pair crops");
    std::string pairs_dir, label_csv, rater = "rater1";
    bool quaternary = false;
    label->add_option("pairs", pairs_dir, "directory of pair crops")->required();
    label->add_option("out", label_csv, "ratings CSV to append to")->required();
    label->add_option("--rater", rater, "rater id")->capture_default_str();
    label->add_flag("--quaternary", quaternary, "rate classes 1-4 instead of p/n");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic page-pair corpus");
    int synth_n = 10;
    std::uint32_t synth_seed = 1;
    std::string synth_out = "corpus";
    synth_cmd->add_option("--n", synth_n, "number of page pairs")->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed, "corpus seed")->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "output directory")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "score a corpus against its oracle");
    std::string manifest_path, export_csv;
    int threads = 0;
    CommonOpts eval_opts;
    eval->add_option("manifest", manifest_path, "corpus manifest.json")->required();
    add_common(eval, eval_opts);
    eval->add_option("--threads", threads, "worker pool size (0 = auto)");
    eval->add_option("--export-features", export_csv, "write labeled samples CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (compare->parsed()) return cmd_compare(baseline_path, test_path, compare_opts, timings);
        if (segment->parsed()) return cmd_segment(page_path, segment_opts);
        if (train->parsed())
            return cmd_train(csv_path, model_kind, target_name, hidden, train_seed, folds,
                             train_out);
        if (label->parsed()) return cmd_label(pairs_dir, label_csv, rater, quaternary);
        if (synth_cmd->parsed()) return cmd_synth(synth_n, synth_seed, synth_out);
        if (eval->parsed()) return cmd_eval(manifest_path, eval_opts, threads, export_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
