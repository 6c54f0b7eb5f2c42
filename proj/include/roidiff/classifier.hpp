/**
 * @file classifier.hpp
 * @brief False-positive filtering: the 17-feature sample, CART decision
 *        tree, feed-forward network, k-fold evaluation and model files.
 */
#ifndef ROIDIFF_CLASSIFIER_HPP
#define ROIDIFF_CLASSIFIER_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "roidiff/matching.hpp"

namespace roidiff::classifier {

inline constexpr int kFeatureCount = 17;

/// Canonical sample layout: h0..h9, correlation, x, y, w, h, config index,
/// mismatch density. Order is frozen; to_array() is the single source of it.
struct FeatureVector17 {
    std::array<double, 10> histogram{};
    double correlation = 0.0;
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    int config_index = 1; // browser-platform combination, 1..14
    double mismatch_density = 0.0;
    bool null_side = false; // one ROI of the pair was absent

    std::array<double, kFeatureCount> to_array() const;
    static FeatureVector17 from_array(const std::array<double, kFeatureCount>& a);
};

enum class Target { Binary, Quaternary };

inline int class_count(Target t) { return t == Target::Binary ? 2 : 4; }

/// Binary classes: 0 = false positive, 1 = incompatibility.
inline constexpr int kFalsePositive = 0;
inline constexpr int kIncompatibility = 1;

/// Quaternary classes C1..C4 are stored as indices 0..3.
std::string class_name(Target t, int cls);

struct LabeledSample {
    FeatureVector17 features;
    std::optional<int> binary_label;     // 0 / 1
    std::optional<int> quaternary_label; // 0..3 for C1..C4
};

/// Label for the requested target; throws FormatError when absent.
int label_of(const LabeledSample& s, Target t);

/// Features of a pair verdict. Histogram, position and size come from the
/// baseline ROI, or from the test ROI when the baseline side is absent.
/// Throws FormatError when both sides are absent.
FeatureVector17 build_feature_vector(const matching::PairVerdict& pv, int config_index,
                                     double mismatch_density);

// ---------------------------------------------------------------------------
// Decision tree
// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0.0; // go left when value < threshold
    int left = -1;
    int right = -1;
    std::vector<std::int64_t> class_counts; // training distribution at the node
};

struct TreeParams {
    int min_leaf = 5;
    int max_depth = 20;
};

struct TreeModel {
    Target target = Target::Binary;
    std::vector<TreeNode> nodes; // node 0 is the root
    int pruning_level = 0;

    bool empty() const { return nodes.empty(); }
    std::size_t node_count() const { return nodes.size(); }
};

/// CART: greedy binary splits maximizing Gini gain. Deterministic for a
/// fixed sample order; ties go to the lower feature index, then the lower
/// threshold. Single-class data yields a single leaf.
TreeModel train_tree(const std::vector<LabeledSample>& data, Target target,
                     const TreeParams& params = {});

/// Weakest-link cost-complexity sequence. Level 0 is the tree itself; each
/// following level collapses the internal node(s) with the smallest
/// per-leaf error increase; levels beyond the sequence give the root leaf.
TreeModel prune_tree(const TreeModel& t, int level);

/// Length of the pruning sequence (number of levels after 0).
int prune_sequence_length(const TreeModel& t);

// ---------------------------------------------------------------------------
// Feed-forward network: 17 inputs, one sigmoid hidden layer, softmax output
// ---------------------------------------------------------------------------

struct NNParams {
    int hidden_neurons = 11;
    int epochs = 500;
    double learning_rate = 0.05;
    int batch_size = 32;
    std::uint32_t seed = 1;
};

struct NNModel {
    Target target = Target::Binary;
    int inputs = kFeatureCount;
    int hidden = 11;
    int outputs = 2;
    std::vector<double> w1; // hidden x inputs, row-major
    std::vector<double> b1; // hidden
    std::vector<double> w2; // outputs x hidden
    std::vector<double> b2; // outputs
    std::array<double, kFeatureCount> feat_mean{};
    std::array<double, kFeatureCount> feat_std{}; // zero-variance features clamp to 1
};

/// Mini-batch gradient descent on mean cross-entropy. Initialization,
/// shuffling and updates are fully determined by the seed.
NNModel train_nn(const std::vector<LabeledSample>& data, Target target,
                 const NNParams& params = {});

/// Softmax posterior over classes for a raw (unnormalized) sample.
std::vector<double> nn_posterior(const NNModel& m, const FeatureVector17& fv);

// Loss / gradient on raw samples, exposed for gradient verification.
// Parameter layout: w1, b1, w2, b2 concatenated.
std::vector<double> nn_pack(const NNModel& m);
void nn_unpack(NNModel& m, const std::vector<double>& params);
double nn_loss(const NNModel& m, const std::vector<FeatureVector17>& xs,
               const std::vector<int>& ys);
std::vector<double> nn_gradient(const NNModel& m, const std::vector<FeatureVector17>& xs,
                                const std::vector<int>& ys);

// ---------------------------------------------------------------------------
// Prediction and evaluation
// ---------------------------------------------------------------------------

using Model = std::variant<TreeModel, NNModel>;

struct Prediction {
    int cls = 0;
    double probability = 0.0;
};

/// Maximum-posterior class; ties break toward the lower class index.
Prediction predict(const TreeModel& m, const FeatureVector17& fv);
Prediction predict(const NNModel& m, const FeatureVector17& fv);
Prediction predict(const Model& m, const FeatureVector17& fv);

Target model_target(const Model& m);

struct ClassMetrics {
    double precision = 0.0; // 0 when nothing was predicted positive
    double recall = 0.0;
    double f_score = 0.0;
};

struct EvalMetrics {
    std::vector<ClassMetrics> per_class;
    double mean_training_seconds = 0.0;

    /// Binary convenience: metrics of the incompatibility class.
    const ClassMetrics& positive() const { return per_class.at(kIncompatibility); }
};

/// One-vs-rest precision/recall/F per class.
EvalMetrics metrics(const std::vector<int>& predictions, const std::vector<int>& truth,
                    int n_classes);

using Trainer = std::function<Model(const std::vector<LabeledSample>&, std::uint32_t seed)>;

Trainer make_tree_trainer(Target target, TreeParams params = {});
Trainer make_nn_trainer(Target target, NNParams params = {});

/// Stratified k-fold cross-validation; per-fold metrics are averaged.
/// Fold assignment is a seeded shuffle within each class.
EvalMetrics cross_validate(const std::vector<LabeledSample>& data, Target target, int k,
                           const Trainer& trainer, std::uint32_t seed);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Versioned JSON model file; load(save(m)) predicts bit-identically.
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);
std::string model_to_json(const Model& m);
Model model_from_json(const std::string& text);

/// CSV with a mandatory header: h0..h9, correlation, x, y, w, h,
/// config_index, mismatch_density, binary_label, quaternary_label.
/// Label cells may be empty, but not both at once.
std::vector<LabeledSample> load_samples_csv(const std::string& path);
void save_samples_csv(const std::string& path, const std::vector<LabeledSample>& samples);

} // namespace roidiff::classifier

#endif
