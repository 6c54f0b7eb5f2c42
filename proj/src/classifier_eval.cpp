#include "roidiff/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

namespace roidiff::classifier {

EvalMetrics metrics(const std::vector<int>& predictions, const std::vector<int>& truth,
                    int n_classes) {
    if (predictions.size() != truth.size())
        throw FormatError("metrics: prediction/truth length mismatch");
    if (predictions.empty())
        throw FormatError("metrics: empty input");

    EvalMetrics em;
    em.per_class.resize(n_classes);
    for (int c = 0; c < n_classes; ++c) {
        std::int64_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const bool pred_c = predictions[i] == c;
            const bool true_c = truth[i] == c;
            tp += pred_c && true_c;
            fp += pred_c && !true_c;
            fn += !pred_c && true_c;
        }
        ClassMetrics& cm = em.per_class[c];
        cm.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        cm.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        cm.f_score = (cm.precision + cm.recall) > 0.0
                         ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                         : 0.0;
    }
    return em;
}

Trainer make_tree_trainer(Target target, TreeParams params) {
    return [target, params](const std::vector<LabeledSample>& data, std::uint32_t) -> Model {
        return train_tree(data, target, params);
    };
}

Trainer make_nn_trainer(Target target, NNParams params) {
    return [target, params](const std::vector<LabeledSample>& data, std::uint32_t seed) -> Model {
        NNParams p = params;
        p.seed = seed;
        return train_nn(data, target, p);
    };
}

Prediction predict(const Model& m, const FeatureVector17& fv) {
    return std::visit([&](const auto& concrete) { return predict(concrete, fv); }, m);
}

Target model_target(const Model& m) {
    return std::visit([](const auto& concrete) { return concrete.target; }, m);
}

namespace {

// Stratified fold assignment: seeded shuffle within each class, then
// round-robin dealing. Rotating the deal offset retries when some fold's
// training set would miss a class entirely.
std::vector<int> stratified_folds(const std::vector<int>& labels, int n_classes, int k,
                                  std::uint32_t seed) {
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::mt19937 rng(seed);
    for (auto& group : by_class) std::shuffle(group.begin(), group.end(), rng);

    std::vector<int> fold(labels.size(), -1);
    for (int offset = 0; offset < k; ++offset) {
        for (int c = 0; c < n_classes; ++c)
            for (std::size_t pos = 0; pos < by_class[c].size(); ++pos)
                fold[by_class[c][pos]] = static_cast<int>((pos + offset) % k);

        bool ok = true;
        for (int f = 0; f < k && ok; ++f)
            for (int c = 0; c < n_classes && ok; ++c) {
                if (by_class[c].empty()) continue;
                bool present = false;
                for (std::size_t i : by_class[c])
                    if (fold[i] != f) { present = true; break; }
                ok = present;
            }
        if (ok) return fold;
    }
    throw FormatError("cross_validate: cannot stratify, a class has too few samples");
}

} // namespace

EvalMetrics cross_validate(const std::vector<LabeledSample>& data, Target target, int k,
                           const Trainer& trainer, std::uint32_t seed) {
    if (k < 2 || static_cast<std::size_t>(k) > data.size())
        throw FormatError("cross_validate: invalid fold count");

    const int n_classes = class_count(target);
    std::vector<int> labels(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) labels[i] = label_of(data[i], target);

    const std::vector<int> fold = stratified_folds(labels, n_classes, k, seed);

    EvalMetrics avg;
    avg.per_class.resize(n_classes);
    double total_seconds = 0.0;
    for (int f = 0; f < k; ++f) {
        std::vector<LabeledSample> train;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (fold[i] == f)
                test_idx.push_back(i);
            else
                train.push_back(data[i]);
        }

        const auto t0 = std::chrono::steady_clock::now();
        const Model model = trainer(train, seed + static_cast<std::uint32_t>(f));
        const auto t1 = std::chrono::steady_clock::now();
        total_seconds += std::chrono::duration<double>(t1 - t0).count();

        std::vector<int> preds, truth;
        preds.reserve(test_idx.size());
        truth.reserve(test_idx.size());
        for (std::size_t i : test_idx) {
            preds.push_back(predict(model, data[i].features).cls);
            truth.push_back(labels[i]);
        }
        const EvalMetrics fm = metrics(preds, truth, n_classes);
        for (int c = 0; c < n_classes; ++c) {
            avg.per_class[c].precision += fm.per_class[c].precision;
            avg.per_class[c].recall += fm.per_class[c].recall;
            avg.per_class[c].f_score += fm.per_class[c].f_score;
        }
    }
    for (int c = 0; c < n_classes; ++c) {
        avg.per_class[c].precision /= k;
        avg.per_class[c].recall /= k;
        avg.per_class[c].f_score /= k;
    }
    avg.mean_training_seconds = total_seconds / k;
    return avg;
}

} // namespace roidiff::classifier
