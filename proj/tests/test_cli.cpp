#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "roidiff/classifier.hpp"
#include "roidiff/png_io.hpp"
#include "roidiff/synth.hpp"

namespace fs = std::filesystem;

namespace {

const char* kTool = ROIDIFF_TOOL_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("roidiff_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string operator/(const char* name) const { return (path / name).string(); }
};

int run(const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("cli") {
    TEST_CASE("compare: identical files exit 0, defect exits 1, missing file exits 2") {
        TempDir dir;
        roidiff::synth::CorpusMix mix;
        mix.delete_defects = 1;
        const auto corpus = roidiff::synth::gen_corpus(1, 321, mix);
        const std::string base = dir / "base.png";
        const std::string test = dir / "test.png";
        roidiff::write_png(base, roidiff::synth::render(corpus[0].baseline));
        roidiff::write_png(test, roidiff::synth::render(corpus[0].under_test));

        const std::string tool = kTool;
        CHECK(run(tool + " compare " + base + " " + base + " --out " + (dir / "self")) == 0);
        CHECK(run(tool + " compare " + base + " " + test + " --out " + (dir / "diff")) == 1);
        CHECK(run(tool + " compare " + (dir / "nope.png") + " " + base) == 2);
        CHECK(fs::exists(dir.path / "diff" / "report.json"));
        CHECK(fs::exists(dir.path / "diff" / "overlay.png"));
    }

    TEST_CASE("compare: reports are byte-identical across runs") {
        TempDir dir;
        roidiff::synth::CorpusMix mix;
        mix.shift_defects = 1;
        const auto corpus = roidiff::synth::gen_corpus(1, 322, mix);
        const std::string base = dir / "base.png";
        const std::string test = dir / "test.png";
        roidiff::write_png(base, roidiff::synth::render(corpus[0].baseline));
        roidiff::write_png(test, roidiff::synth::render(corpus[0].under_test));

        const std::string tool = kTool;
        CHECK(run(tool + " compare " + base + " " + test + " --out " + (dir / "r1")) == 1);
        CHECK(run(tool + " compare " + base + " " + test + " --out " + (dir / "r2")) == 1);
        CHECK(slurp(dir / "r1/report.json") == slurp(dir / "r2/report.json"));
        CHECK(slurp(dir / "r1/overlay.png") == slurp(dir / "r2/overlay.png"));
    }

    TEST_CASE("segment: blank page yields an empty ROI list, repeat is identical") {
        TempDir dir;
        const std::string page = dir / "page.png";
        roidiff::write_png(page, roidiff::Raster(200, 150, 1, 255));
        const std::string tool = kTool;
        CHECK(run(tool + " segment " + page + " --out " + (dir / "s1")) == 0);
        CHECK(run(tool + " segment " + page + " --out " + (dir / "s2")) == 0);
        const std::string r1 = slurp(dir / "s1/rois.json");
        CHECK(r1.find("\"rois\": []") != std::string::npos);
        CHECK(r1 == slurp(dir / "s2/rois.json"));
    }

    TEST_CASE("synth: deterministic corpus, n=0 rejected") {
        TempDir dir;
        const std::string tool = kTool;
        CHECK(run(tool + " synth --n 4 --seed 7 --out " + (dir / "c1")) == 0);
        CHECK(run(tool + " synth --n 4 --seed 7 --out " + (dir / "c2")) == 0);
        CHECK(slurp(dir / "c1/manifest.json") == slurp(dir / "c2/manifest.json"));
        CHECK(slurp(dir / "c1/pair_0000_base.png") == slurp(dir / "c2/pair_0000_base.png"));
        CHECK(run(tool + " synth --n 0 --out " + (dir / "c3")) == 2);
    }

    TEST_CASE("train: bad csv header exits 2") {
        TempDir dir;
        const std::string csv = dir / "bad.csv";
        {
            std::ofstream out(csv);
            out << "nope,nope\n1,2\n";
        }
        CHECK(run(std::string(kTool) + " train " + csv + " --model tree") == 2);
    }

    TEST_CASE("train: separable csv produces an accurate model file") {
        TempDir dir;
        std::mt19937 rng(71);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<roidiff::classifier::LabeledSample> samples;
        for (int i = 0; i < 120; ++i) {
            roidiff::classifier::LabeledSample s;
            s.features.correlation = i % 2 ? 0.8 + 0.2 * u(rng) : 0.2 * u(rng);
            s.features.x = u(rng) * 500;
            s.features.y = u(rng) * 500;
            s.binary_label = i % 2;
            samples.push_back(s);
        }
        const std::string csv = dir / "sep.csv";
        roidiff::classifier::save_samples_csv(csv, samples);

        const std::string model_path = dir / "model.json";
        CHECK(run(std::string(kTool) + " train " + csv + " --model nn --seed 5 --out " +
                  model_path) == 0);

        const auto model = roidiff::classifier::load_model(model_path);
        std::vector<int> preds, truth;
        for (const auto& s : samples) {
            preds.push_back(roidiff::classifier::predict(model, s.features).cls);
            truth.push_back(*s.binary_label);
        }
        const auto em = roidiff::classifier::metrics(preds, truth, 2);
        CHECK(em.positive().f_score >= 0.95);
    }

    TEST_CASE("label: records ratings and resumes past rated ids") {
        TempDir dir;
        const std::string pairs = dir / "pairs";
        fs::create_directories(pairs);
        roidiff::write_png(pairs + "/p1.png", roidiff::Raster(4, 4, 1, 0));
        roidiff::write_png(pairs + "/p2.png", roidiff::Raster(4, 4, 1, 0));
        roidiff::write_png(pairs + "/p3.png", roidiff::Raster(4, 4, 1, 0));
        const std::string csv = dir / "ratings.csv";
        const std::string tool = kTool;

        // rate the first two (one invalid entry in between), then stop
        CHECK(std::system(("printf 'p\\nx\\nn\\nq\\n' | " + tool + " label " + pairs + " " + csv +
                           " --rater r1 >/dev/null 2>&1")
                              .c_str()) == 0);
        std::string content = slurp(csv);
        CHECK(content.find("p1,r1,p") != std::string::npos);
        CHECK(content.find("p2,r1,n") != std::string::npos);
        CHECK(content.find("p3") == std::string::npos);

        // resume: only p3 is asked
        CHECK(std::system(("printf '3\\n' | " + tool + " label " + pairs + " " + csv +
                           " --rater r2 --quaternary >/dev/null 2>&1")
                              .c_str()) == 0);
        content = slurp(csv);
        CHECK(content.find("p3,r2,3") != std::string::npos);
        CHECK(content.find("p1,r2") == std::string::npos);
    }

    TEST_CASE("eval: runs a corpus against its oracle and exports features") {
        TempDir dir;
        const std::string tool = kTool;
        CHECK(run(tool + " synth --n 12 --seed 99 --out " + (dir / "corpus")) == 0);

        // tight matching config so noise perturbations become flags
        const std::string cfg = dir / "eval.cfg";
        {
            std::ofstream out(cfg);
            out << "schema_version = 1\n"
                << "harris.threshold = 0.005\n"
                << "match.centroid_tol = 2\n"
                << "match.size_tol = 2\n"
                << "match.ssd_threshold = 0.004\n";
        }
        const std::string features = dir / "features.csv";
        CHECK(run(tool + " eval " + (dir / "corpus/manifest.json") + " --config " + cfg +
                  " --export-features " + features) == 0);
        CHECK(fs::exists(features));
        CHECK(run(tool + " eval " + (dir / "corpus/does_not_exist.json")) == 2);
    }
}
