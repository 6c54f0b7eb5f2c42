#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "roidiff/classifier.hpp"

using namespace roidiff;
using namespace roidiff::classifier;

namespace {

FeatureVector17 random_fv(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FeatureVector17 fv;
    double sum = 0.0;
    for (double& h : fv.histogram) {
        h = u(rng);
        sum += h;
    }
    for (double& h : fv.histogram) h /= sum;
    fv.correlation = u(rng);
    fv.x = u(rng) * 1200;
    fv.y = u(rng) * 4000;
    fv.w = 10 + u(rng) * 290;
    fv.h = 10 + u(rng) * 290;
    fv.config_index = 1 + static_cast<int>(rng() % 14);
    fv.mismatch_density = u(rng);
    return fv;
}

// two classes separated by the correlation feature with a clear margin
std::vector<LabeledSample> separable_by_correlation(std::mt19937& rng, int n_per_class,
                                                    double lo_hi = 0.3, double hi_lo = 0.7) {
    std::vector<LabeledSample> data;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n_per_class; ++i) {
        LabeledSample neg;
        neg.features = random_fv(rng);
        neg.features.correlation = u(rng) * lo_hi;
        neg.binary_label = kFalsePositive;
        data.push_back(neg);

        LabeledSample pos;
        pos.features = random_fv(rng);
        pos.features.correlation = hi_lo + u(rng) * (1.0 - hi_lo);
        pos.binary_label = kIncompatibility;
        data.push_back(pos);
    }
    return data;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_SUITE("classifier.features") {
    TEST_CASE("canonical array order is frozen") {
        FeatureVector17 fv;
        for (int i = 0; i < 10; ++i) fv.histogram[i] = i * 0.1;
        fv.correlation = 0.5;
        fv.x = 11;
        fv.y = 12;
        fv.w = 13;
        fv.h = 14;
        fv.config_index = 7;
        fv.mismatch_density = 0.25;
        const auto a = fv.to_array();
        REQUIRE(a.size() == 17);
        CHECK(a[0] == 0.0);
        CHECK(a[9] == doctest::Approx(0.9));
        CHECK(a[10] == 0.5);
        CHECK(a[11] == 11);
        CHECK(a[12] == 12);
        CHECK(a[13] == 13);
        CHECK(a[14] == 14);
        CHECK(a[15] == 7);
        CHECK(a[16] == 0.25);
        const FeatureVector17 back = FeatureVector17::from_array(a);
        CHECK(back.to_array() == a);
    }

    TEST_CASE("build_feature_vector prefers the baseline side") {
        features::AnalyzedRoi aroi;
        aroi.roi.bbox = Box{15, 25, 40, 30};
        aroi.roi.window = Raster(40, 30, 1, 200);
        aroi.features = features::extract_features(aroi.roi);

        matching::PairVerdict pv;
        pv.roib = aroi;
        pv.correlation = 0.0; // missing counterpart
        const FeatureVector17 fv = build_feature_vector(pv, 3, 0.125);
        CHECK(fv.x == 15);
        CHECK(fv.y == 25);
        CHECK(fv.w == 40);
        CHECK(fv.h == 30);
        CHECK(fv.correlation == 0.0);
        CHECK(fv.config_index == 3);
        CHECK(fv.mismatch_density == doctest::Approx(0.125));
        CHECK(fv.null_side);
    }

    TEST_CASE("missing baseline side falls back to the test ROI") {
        features::AnalyzedRoi aroi;
        aroi.roi.bbox = Box{5, 6, 10, 10};
        aroi.roi.window = Raster(10, 10, 1, 100);
        aroi.features = features::extract_features(aroi.roi);

        matching::PairVerdict pv;
        pv.roit = aroi;
        const FeatureVector17 fv = build_feature_vector(pv, 1, 0.0);
        CHECK(fv.x == 5);
        CHECK(fv.w == 10);

        matching::PairVerdict empty;
        CHECK_THROWS_AS(build_feature_vector(empty, 1, 0.0), FormatError);
    }

    TEST_CASE("exactly matched identical pair carries correlation one") {
        std::mt19937 rng(10);
        segmentation::Roi roi;
        roi.bbox = Box{0, 0, 12, 12};
        roi.window = Raster(12, 12, 1);
        for (auto& v : roi.window.data()) v = static_cast<std::uint8_t>(rng() % 256);
        const features::AnalyzedRoi a{roi, features::extract_features(roi)};

        const matching::MatchSet ms = matching::match_rois({a}, {a}, {});
        REQUIRE(ms.verdicts.size() == 1);
        const FeatureVector17 fv = build_feature_vector(ms.verdicts[0], 1, 0.0);
        CHECK(fv.correlation == doctest::Approx(1.0));
    }
}

TEST_SUITE("classifier.tree") {
    TEST_CASE("separable data yields a depth-1 split on correlation") {
        std::mt19937 rng(11);
        const auto data = separable_by_correlation(rng, 40);
        const TreeModel t = train_tree(data, Target::Binary);
        REQUIRE(t.nodes.size() == 3);
        CHECK(t.nodes[0].feature == 10); // the correlation column
        CHECK(t.nodes[0].threshold > 0.3);
        CHECK(t.nodes[0].threshold < 0.7);
        for (const auto& s : data)
            CHECK(predict(t, s.features).cls == *s.binary_label);
    }

    TEST_CASE("single-class data becomes one leaf with certainty") {
        std::mt19937 rng(12);
        std::vector<LabeledSample> data;
        for (int i = 0; i < 20; ++i) {
            LabeledSample s;
            s.features = random_fv(rng);
            s.binary_label = kIncompatibility;
            data.push_back(s);
        }
        const TreeModel t = train_tree(data, Target::Binary);
        CHECK(t.nodes.size() == 1);
        const Prediction p = predict(t, data[0].features);
        CHECK(p.cls == kIncompatibility);
        CHECK(p.probability == 1.0);
    }

    TEST_CASE("contradictory duplicates give probability one half") {
        std::mt19937 rng(13);
        const FeatureVector17 fv = random_fv(rng);
        std::vector<LabeledSample> data;
        for (int i = 0; i < 10; ++i) {
            LabeledSample s;
            s.features = fv;
            s.binary_label = i % 2;
            data.push_back(s);
        }
        const TreeModel t = train_tree(data, Target::Binary);
        CHECK(t.nodes.size() == 1);
        CHECK(predict(t, fv).probability == doctest::Approx(0.5));
    }

    TEST_CASE("prediction is invariant under a monotone feature transform") {
        std::mt19937 rng(14);
        const auto data = separable_by_correlation(rng, 30, 0.45, 0.55); // narrow margin

        // cube the split feature itself: order preserved, values warped
        auto transformed = data;
        for (auto& s : transformed) {
            const double v = s.features.correlation;
            s.features.correlation = v * v * v;
        }
        const TreeModel t1 = train_tree(data, Target::Binary);
        const TreeModel t2 = train_tree(transformed, Target::Binary);
        for (std::size_t i = 0; i < data.size(); ++i)
            CHECK(predict(t1, data[i].features).cls == predict(t2, transformed[i].features).cls);
    }
}

TEST_SUITE("classifier.prune") {
    TEST_CASE("level zero is the identity") {
        std::mt19937 rng(15);
        const auto data = separable_by_correlation(rng, 30);
        const TreeModel t = train_tree(data, Target::Binary);
        const TreeModel p = prune_tree(t, 0);
        CHECK(p.nodes.size() == t.nodes.size());
    }

    TEST_CASE("levels shrink monotonically down to the root leaf") {
        std::mt19937 rng(16);
        std::vector<LabeledSample> data;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 400; ++i) {
            LabeledSample s;
            s.features = random_fv(rng);
            // noisy labels force a deep tree
            s.binary_label = (s.features.correlation + 0.3 * u(rng)) > 0.6 ? 1 : 0;
            data.push_back(s);
        }
        const TreeModel t = train_tree(data, Target::Binary);
        REQUIRE(t.nodes.size() > 3);

        const int levels = prune_sequence_length(t);
        CHECK(levels >= 1);
        std::size_t prev = t.nodes.size();
        for (int level = 1; level <= levels; ++level) {
            const TreeModel p = prune_tree(t, level);
            CHECK(p.nodes.size() < prev);
            prev = p.nodes.size();
        }
        const TreeModel full = prune_tree(t, levels + 5); // beyond the sequence
        CHECK(full.nodes.size() == 1);
        const auto& counts = full.nodes[0].class_counts;
        std::int64_t total = 0;
        for (auto c : counts) total += c;
        CHECK(total == static_cast<std::int64_t>(data.size()));
    }
}

TEST_SUITE("classifier.nn") {
    TEST_CASE("separable data trains to high accuracy") {
        std::mt19937 rng(17);
        const auto data = separable_by_correlation(rng, 100);
        NNParams params;
        params.seed = 5;
        const NNModel m = train_nn(data, Target::Binary, params);
        int correct = 0;
        for (const auto& s : data)
            correct += predict(m, s.features).cls == *s.binary_label;
        CHECK(static_cast<double>(correct) / data.size() >= 0.99);
    }

    TEST_CASE("training is seed-deterministic to the bit") {
        std::mt19937 rng(18);
        const auto data = separable_by_correlation(rng, 30);
        NNParams params;
        params.epochs = 50;
        params.seed = 42;
        const NNModel a = train_nn(data, Target::Binary, params);
        const NNModel b = train_nn(data, Target::Binary, params);
        CHECK(a.w1 == b.w1);
        CHECK(a.b1 == b.b1);
        CHECK(a.w2 == b.w2);
        CHECK(a.b2 == b.b2);
    }

    TEST_CASE("posterior sums to one") {
        std::mt19937 rng(19);
        const auto data = separable_by_correlation(rng, 20);
        NNParams params;
        params.epochs = 20;
        const NNModel m = train_nn(data, Target::Binary, params);
        for (int i = 0; i < 20; ++i) {
            const auto post = nn_posterior(m, random_fv(rng));
            double sum = 0.0;
            for (double p : post) sum += p;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        }
    }

    TEST_CASE("analytic gradient matches central finite differences") {
        std::mt19937 rng(20);
        for (int config = 0; config < 20; ++config) {
            const int hidden = 2 + static_cast<int>(rng() % 6);
            const int n = 4 + static_cast<int>(rng() % 5);
            const bool quaternary = (config % 2) == 1;
            const Target target = quaternary ? Target::Quaternary : Target::Binary;

            std::vector<LabeledSample> data;
            std::vector<FeatureVector17> xs;
            std::vector<int> ys;
            for (int i = 0; i < n; ++i) {
                LabeledSample s;
                s.features = random_fv(rng);
                const int y = static_cast<int>(rng() % (quaternary ? 4 : 2));
                s.binary_label = y % 2;
                s.quaternary_label = y;
                data.push_back(s);
                xs.push_back(s.features);
                ys.push_back(y);
            }
            NNParams params;
            params.hidden_neurons = hidden;
            params.epochs = 1;
            params.seed = 1000 + config;
            NNModel m = train_nn(data, target, params);

            const std::vector<double> analytic = nn_gradient(m, xs, ys);
            std::vector<double> theta = nn_pack(m);
            const double eps = 1e-6;
            for (std::size_t i = 0; i < theta.size(); i += 1 + theta.size() / 25) {
                const double saved = theta[i];
                theta[i] = saved + eps;
                nn_unpack(m, theta);
                const double up = nn_loss(m, xs, ys);
                theta[i] = saved - eps;
                nn_unpack(m, theta);
                const double down = nn_loss(m, xs, ys);
                theta[i] = saved;
                nn_unpack(m, theta);
                const double numeric = (up - down) / (2 * eps);
                const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
                CHECK(std::abs(numeric - analytic[i]) / denom < 1e-4);
            }
        }
    }

    TEST_CASE("loss decreases monotonically with a small learning rate") {
        std::mt19937 rng(21);
        const auto data = separable_by_correlation(rng, 25);
        std::vector<FeatureVector17> xs;
        std::vector<int> ys;
        for (const auto& s : data) {
            xs.push_back(s.features);
            ys.push_back(*s.binary_label);
        }
        NNParams params;
        params.epochs = 0;
        params.seed = 3;
        NNModel m = train_nn(data, Target::Binary, params); // initialized, untrained

        // full-batch descent must not increase the loss
        double prev = nn_loss(m, xs, ys);
        const double lr = 0.01;
        for (int step = 0; step < 60; ++step) {
            const auto grad = nn_gradient(m, xs, ys);
            auto theta = nn_pack(m);
            for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
            nn_unpack(m, theta);
            const double cur = nn_loss(m, xs, ys);
            CHECK(cur <= prev + 1e-6);
            prev = cur;
        }
    }
}

TEST_SUITE("classifier.predict") {
    TEST_CASE("depth-1 tree routes by the split") {
        TreeModel t;
        t.target = Target::Binary;
        t.nodes.resize(3);
        t.nodes[0].feature = 10;
        t.nodes[0].threshold = 0.5;
        t.nodes[0].left = 1;
        t.nodes[0].right = 2;
        t.nodes[0].class_counts = {5, 5};
        t.nodes[1].class_counts = {5, 0};
        t.nodes[2].class_counts = {0, 5};

        FeatureVector17 fv;
        fv.correlation = 0.9;
        CHECK(predict(t, fv).cls == kIncompatibility);
        fv.correlation = 0.1;
        CHECK(predict(t, fv).cls == kFalsePositive);
    }

    TEST_CASE("single leaf always answers its class") {
        TreeModel t;
        t.target = Target::Binary;
        t.nodes.resize(1);
        t.nodes[0].class_counts = {0, 7};
        std::mt19937 rng(22);
        for (int i = 0; i < 10; ++i)
            CHECK(predict(t, random_fv(rng)).cls == kIncompatibility);
    }
}

TEST_SUITE("classifier.metrics") {
    TEST_CASE("perfect predictions score one") {
        const EvalMetrics em = metrics({0, 1, 0, 1}, {0, 1, 0, 1}, 2);
        CHECK(em.per_class[0].f_score == doctest::Approx(1.0));
        CHECK(em.per_class[1].f_score == doctest::Approx(1.0));
    }

    TEST_CASE("hand-computed case: TP=2 FP=1 FN=0") {
        // positives: predicted {1,1,1}, truth {1,1,0}
        const EvalMetrics em = metrics({1, 1, 1}, {1, 1, 0}, 2);
        CHECK(em.positive().precision == doctest::Approx(2.0 / 3.0));
        CHECK(em.positive().recall == doctest::Approx(1.0));
        CHECK(em.positive().f_score == doctest::Approx(0.8));
    }

    TEST_CASE("no predicted positives gives zero precision") {
        const EvalMetrics em = metrics({0, 0, 0}, {1, 0, 1}, 2);
        CHECK(em.positive().precision == 0.0);
        CHECK(em.positive().recall == 0.0);
        CHECK(em.positive().f_score == 0.0);
    }

    TEST_CASE("length mismatch and empty input are rejected") {
        CHECK_THROWS_AS(metrics({1}, {1, 0}, 2), FormatError);
        CHECK_THROWS_AS(metrics({}, {}, 2), FormatError);
    }
}

TEST_SUITE("classifier.cross_validate") {
    TEST_CASE("perfect classifier on separable data") {
        std::mt19937 rng(23);
        const auto data = separable_by_correlation(rng, 50);
        const EvalMetrics em =
            cross_validate(data, Target::Binary, 5, make_tree_trainer(Target::Binary), 7);
        CHECK(em.positive().precision == doctest::Approx(1.0));
        CHECK(em.positive().recall == doctest::Approx(1.0));
        CHECK(em.positive().f_score == doctest::Approx(1.0));
    }

    TEST_CASE("constant predictor recalls one class only") {
        std::mt19937 rng(24);
        const auto data = separable_by_correlation(rng, 30);
        const Trainer constant = [](const std::vector<LabeledSample>&, std::uint32_t) -> Model {
            TreeModel t;
            t.target = Target::Binary;
            t.nodes.resize(1);
            t.nodes[0].class_counts = {0, 1}; // always predicts incompatibility
            return t;
        };
        const EvalMetrics em = cross_validate(data, Target::Binary, 5, constant, 7);
        CHECK(em.per_class[kIncompatibility].recall == doctest::Approx(1.0));
        CHECK(em.per_class[kFalsePositive].recall == doctest::Approx(0.0));
    }

    TEST_CASE("same seed reproduces identical metrics") {
        std::mt19937 rng(25);
        const auto data = separable_by_correlation(rng, 40);
        const auto trainer = make_nn_trainer(Target::Binary, {11, 30, 0.05, 32, 1});
        const EvalMetrics a = cross_validate(data, Target::Binary, 5, trainer, 99);
        const EvalMetrics b = cross_validate(data, Target::Binary, 5, trainer, 99);
        for (int c = 0; c < 2; ++c) {
            CHECK(a.per_class[c].precision == b.per_class[c].precision);
            CHECK(a.per_class[c].recall == b.per_class[c].recall);
            CHECK(a.per_class[c].f_score == b.per_class[c].f_score);
        }
    }

    TEST_CASE("every sample lands in exactly one test fold") {
        std::mt19937 rng(26);
        const auto data = separable_by_correlation(rng, 23); // 46 samples, uneven folds
        const int k = 5;

        // a capturing trainer sees each fold's training set; with n samples
        // total, test-fold sizes are n - |train|, and they must sum to n
        std::vector<std::size_t> train_sizes;
        const Trainer capturing = [&train_sizes](const std::vector<LabeledSample>& train,
                                                 std::uint32_t) -> Model {
            train_sizes.push_back(train.size());
            return train_tree(train, Target::Binary);
        };
        cross_validate(data, Target::Binary, k, capturing, 3);
        REQUIRE(train_sizes.size() == static_cast<std::size_t>(k));
        std::size_t tested = 0;
        for (std::size_t s : train_sizes) {
            CHECK(s < data.size());
            tested += data.size() - s;
        }
        CHECK(tested == data.size());
    }
}

TEST_SUITE("classifier.serialization") {
    TEST_CASE("tree roundtrip predicts bit-identically") {
        std::mt19937 rng(27);
        const auto data = separable_by_correlation(rng, 40);
        const TreeModel t = train_tree(data, Target::Binary);
        const std::string path = temp_path("roidiff_tree_model.json");
        save_model(t, path);
        const Model loaded = load_model(path);
        REQUIRE(std::holds_alternative<TreeModel>(loaded));
        for (int i = 0; i < 50; ++i) {
            const FeatureVector17 fv = random_fv(rng);
            const Prediction a = predict(t, fv);
            const Prediction b = predict(loaded, fv);
            CHECK(a.cls == b.cls);
            CHECK(a.probability == b.probability); // exact, not approximate
        }
        std::filesystem::remove(path);
    }

    TEST_CASE("nn roundtrip predicts bit-identically") {
        std::mt19937 rng(28);
        const auto data = separable_by_correlation(rng, 30);
        NNParams params;
        params.epochs = 40;
        const NNModel m = train_nn(data, Target::Binary, params);
        const std::string path = temp_path("roidiff_nn_model.json");
        save_model(m, path);
        const Model loaded = load_model(path);
        REQUIRE(std::holds_alternative<NNModel>(loaded));
        for (int i = 0; i < 50; ++i) {
            const FeatureVector17 fv = random_fv(rng);
            const auto pa = nn_posterior(m, fv);
            const auto pb = nn_posterior(std::get<NNModel>(loaded), fv);
            CHECK(pa == pb);
        }
        std::filesystem::remove(path);
    }

    TEST_CASE("csv roundtrip and header validation") {
        std::mt19937 rng(29);
        std::vector<LabeledSample> samples;
        for (int i = 0; i < 25; ++i) {
            LabeledSample s;
            s.features = random_fv(rng);
            if (i % 3 != 0) s.binary_label = static_cast<int>(rng() % 2);
            if (i % 3 != 1) s.quaternary_label = static_cast<int>(rng() % 4);
            samples.push_back(s);
        }
        const std::string path = temp_path("roidiff_samples.csv");
        save_samples_csv(path, samples);
        const auto loaded = load_samples_csv(path);
        REQUIRE(loaded.size() == samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            CHECK(loaded[i].features.to_array() == samples[i].features.to_array());
            CHECK(loaded[i].binary_label == samples[i].binary_label);
            CHECK(loaded[i].quaternary_label == samples[i].quaternary_label);
        }
        std::filesystem::remove(path);

        const std::string bad = temp_path("roidiff_bad.csv");
        {
            std::FILE* f = std::fopen(bad.c_str(), "w");
            std::fputs("a,b,c\n1,2,3\n", f);
            std::fclose(f);
        }
        CHECK_THROWS_AS(load_samples_csv(bad), FormatError);
        std::filesystem::remove(bad);
    }
}
