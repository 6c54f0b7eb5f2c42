#include "roidiff/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace roidiff::classifier {

std::array<double, kFeatureCount> FeatureVector17::to_array() const {
    std::array<double, kFeatureCount> a{};
    for (int i = 0; i < 10; ++i) a[i] = histogram[i];
    a[10] = correlation;
    a[11] = x;
    a[12] = y;
    a[13] = w;
    a[14] = h;
    a[15] = static_cast<double>(config_index);
    a[16] = mismatch_density;
    return a;
}

FeatureVector17 FeatureVector17::from_array(const std::array<double, kFeatureCount>& a) {
    FeatureVector17 fv;
    for (int i = 0; i < 10; ++i) fv.histogram[i] = a[i];
    fv.correlation = a[10];
    fv.x = a[11];
    fv.y = a[12];
    fv.w = a[13];
    fv.h = a[14];
    fv.config_index = static_cast<int>(std::lround(a[15]));
    fv.mismatch_density = a[16];
    return fv;
}

std::string class_name(Target t, int cls) {
    if (t == Target::Binary)
        return cls == kIncompatibility ? "incompatibility" : "false_positive";
    return "C" + std::to_string(cls + 1);
}

int label_of(const LabeledSample& s, Target t) {
    if (t == Target::Binary) {
        if (!s.binary_label) throw FormatError("sample has no binary label");
        return *s.binary_label;
    }
    if (!s.quaternary_label) throw FormatError("sample has no quaternary label");
    return *s.quaternary_label;
}

FeatureVector17 build_feature_vector(const matching::PairVerdict& pv, int config_index,
                                     double mismatch_density) {
    if (!pv.roib && !pv.roit)
        throw FormatError("build_feature_vector: both ROIs absent");
    const features::AnalyzedRoi& src = pv.roib ? *pv.roib : *pv.roit;
    FeatureVector17 fv;
    fv.histogram = src.features.histogram;
    fv.correlation = pv.correlation;
    fv.x = src.roi.bbox.x;
    fv.y = src.roi.bbox.y;
    fv.w = src.roi.bbox.width;
    fv.h = src.roi.bbox.height;
    fv.config_index = config_index;
    fv.mismatch_density = mismatch_density;
    fv.null_side = !pv.roib || !pv.roit;
    return fv;
}

namespace {

double gini(const std::vector<std::int64_t>& counts, std::int64_t total) {
    if (total == 0) return 0.0;
    double acc = 1.0;
    for (std::int64_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        acc -= p * p;
    }
    return acc;
}

int majority_class(const std::vector<std::int64_t>& counts) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(counts.size()); ++c)
        if (counts[c] > counts[best]) best = c;
    return best;
}

struct Builder {
    const std::vector<std::array<double, kFeatureCount>>& xs;
    const std::vector<int>& ys;
    int n_classes;
    TreeParams params;
    std::vector<TreeNode> nodes;

    int build(std::vector<int>& idx, int depth) {
        std::vector<std::int64_t> counts(n_classes, 0);
        for (int i : idx) ++counts[ys[i]];
        const std::int64_t total = static_cast<std::int64_t>(idx.size());

        const int me = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[me].class_counts = counts;

        const bool pure = std::count_if(counts.begin(), counts.end(),
                                        [](std::int64_t c) { return c > 0; }) <= 1;
        if (pure || depth >= params.max_depth ||
            total < 2 * static_cast<std::int64_t>(params.min_leaf))
            return me;

        // best Gini-gain split; ties resolved by feature index then threshold
        const double parent_gini = gini(counts, total);
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<int> order = idx;
        for (int f = 0; f < kFeatureCount; ++f) {
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (xs[a][f] != xs[b][f]) return xs[a][f] < xs[b][f];
                return a < b;
            });
            std::vector<std::int64_t> left(n_classes, 0);
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                ++left[ys[order[pos]]];
                const std::int64_t nl = static_cast<std::int64_t>(pos) + 1;
                const std::int64_t nr = total - nl;
                if (nl < params.min_leaf || nr < params.min_leaf) continue;
                const double v = xs[order[pos]][f];
                const double next = xs[order[pos + 1]][f];
                if (v == next) continue; // cannot separate equal values
                std::vector<std::int64_t> right(n_classes);
                for (int c = 0; c < n_classes; ++c) right[c] = counts[c] - left[c];
                const double child =
                    (static_cast<double>(nl) * gini(left, nl) +
                     static_cast<double>(nr) * gini(right, nr)) /
                    static_cast<double>(total);
                const double gain = parent_gini - child;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = (v + next) / 2.0;
                }
            }
        }

        if (best_feature < 0 || best_gain <= 1e-12) return me;

        std::vector<int> left_idx, right_idx;
        for (int i : idx) {
            if (xs[i][best_feature] < best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        nodes[me].feature = best_feature;
        nodes[me].threshold = best_threshold;
        const int l = build(left_idx, depth + 1);
        nodes[me].left = l;
        const int r = build(right_idx, depth + 1);
        nodes[me].right = r;
        return me;
    }
};

} // namespace

TreeModel train_tree(const std::vector<LabeledSample>& data, Target target,
                     const TreeParams& params) {
    if (data.empty())
        throw FormatError("train_tree: no samples");

    std::vector<std::array<double, kFeatureCount>> xs;
    std::vector<int> ys;
    xs.reserve(data.size());
    ys.reserve(data.size());
    const int n_classes = class_count(target);
    for (const auto& s : data) {
        xs.push_back(s.features.to_array());
        const int y = label_of(s, target);
        if (y < 0 || y >= n_classes) throw FormatError("train_tree: label out of range");
        ys.push_back(y);
    }

    Builder builder{xs, ys, n_classes, params, {}};
    std::vector<int> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    builder.build(idx, 0);

    TreeModel model;
    model.target = target;
    model.nodes = std::move(builder.nodes);
    return model;
}

namespace {

struct SubtreeStats {
    std::int64_t errors = 0; // misclassified training samples over the subtree leaves
    int leaves = 0;
};

SubtreeStats subtree_stats(const TreeModel& t, int node) {
    const TreeNode& n = t.nodes[node];
    if (n.feature < 0) {
        const std::int64_t total = std::accumulate(n.class_counts.begin(), n.class_counts.end(),
                                                   std::int64_t{0});
        return {total - n.class_counts[majority_class(n.class_counts)], 1};
    }
    const SubtreeStats l = subtree_stats(t, n.left);
    const SubtreeStats r = subtree_stats(t, n.right);
    return {l.errors + r.errors, l.leaves + r.leaves};
}

std::int64_t node_errors(const TreeNode& n) {
    const std::int64_t total = std::accumulate(n.class_counts.begin(), n.class_counts.end(),
                                               std::int64_t{0});
    return total - n.class_counts[majority_class(n.class_counts)];
}

// Collapse the internal nodes with the minimal per-leaf error increase and
// rebuild a compact node vector.
TreeModel collapse_weakest(const TreeModel& t) {
    double min_g = std::numeric_limits<double>::infinity();
    std::vector<bool> collapse(t.nodes.size(), false);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        if (t.nodes[i].feature < 0) continue;
        const SubtreeStats st = subtree_stats(t, static_cast<int>(i));
        const double g = static_cast<double>(node_errors(t.nodes[i]) - st.errors) /
                         static_cast<double>(st.leaves - 1);
        if (g < min_g - 1e-12) {
            min_g = g;
            std::fill(collapse.begin(), collapse.end(), false);
            collapse[i] = true;
        } else if (g <= min_g + 1e-12) {
            collapse[i] = true;
        }
    }

    TreeModel out;
    out.target = t.target;
    // rebuild depth-first, stopping at collapsed nodes
    std::function<int(int)> copy = [&](int src) {
        const TreeNode& n = t.nodes[src];
        const int me = static_cast<int>(out.nodes.size());
        out.nodes.emplace_back();
        out.nodes[me].class_counts = n.class_counts;
        if (n.feature >= 0 && !collapse[src]) {
            out.nodes[me].feature = n.feature;
            out.nodes[me].threshold = n.threshold;
            const int l = copy(n.left);
            out.nodes[me].left = l;
            const int r = copy(n.right);
            out.nodes[me].right = r;
        }
        return me;
    };
    copy(0);
    return out;
}

} // namespace

int prune_sequence_length(const TreeModel& t) {
    int len = 0;
    TreeModel cur = t;
    while (cur.nodes[0].feature >= 0) {
        cur = collapse_weakest(cur);
        ++len;
    }
    return len;
}

TreeModel prune_tree(const TreeModel& t, int level) {
    if (t.empty())
        throw FormatError("prune_tree: empty model");
    TreeModel cur = t;
    for (int i = 0; i < level && cur.nodes[0].feature >= 0; ++i)
        cur = collapse_weakest(cur);
    cur.pruning_level = level;
    return cur;
}

Prediction predict(const TreeModel& m, const FeatureVector17& fv) {
    if (m.empty())
        throw FormatError("predict: empty tree");
    const auto a = fv.to_array();
    int node = 0;
    while (m.nodes[node].feature >= 0)
        node = a[m.nodes[node].feature] < m.nodes[node].threshold ? m.nodes[node].left
                                                                  : m.nodes[node].right;
    const auto& counts = m.nodes[node].class_counts;
    const std::int64_t total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    const int cls = majority_class(counts);
    return {cls, total > 0 ? static_cast<double>(counts[cls]) / static_cast<double>(total) : 0.0};
}

} // namespace roidiff::classifier
