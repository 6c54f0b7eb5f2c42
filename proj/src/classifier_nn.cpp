#include "roidiff/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace roidiff::classifier {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::array<double, kFeatureCount> normalize(const NNModel& m,
                                            const std::array<double, kFeatureCount>& raw) {
    std::array<double, kFeatureCount> z{};
    for (int i = 0; i < kFeatureCount; ++i)
        z[i] = (raw[i] - m.feat_mean[i]) / m.feat_std[i];
    return z;
}

struct Forward {
    std::vector<double> hidden;  // sigmoid activations
    std::vector<double> out;     // softmax posterior
};

Forward forward(const NNModel& m, const std::array<double, kFeatureCount>& z) {
    Forward f;
    f.hidden.resize(m.hidden);
    for (int j = 0; j < m.hidden; ++j) {
        double acc = m.b1[j];
        const double* wrow = m.w1.data() + static_cast<std::size_t>(j) * m.inputs;
        for (int i = 0; i < m.inputs; ++i) acc += wrow[i] * z[i];
        f.hidden[j] = sigmoid(acc);
    }
    f.out.resize(m.outputs);
    double zmax = -std::numeric_limits<double>::infinity();
    for (int o = 0; o < m.outputs; ++o) {
        double acc = m.b2[o];
        const double* wrow = m.w2.data() + static_cast<std::size_t>(o) * m.hidden;
        for (int j = 0; j < m.hidden; ++j) acc += wrow[j] * f.hidden[j];
        f.out[o] = acc;
        zmax = std::max(zmax, acc);
    }
    double sum = 0.0;
    for (int o = 0; o < m.outputs; ++o) {
        f.out[o] = std::exp(f.out[o] - zmax);
        sum += f.out[o];
    }
    for (int o = 0; o < m.outputs; ++o) f.out[o] /= sum;
    return f;
}

struct Gradients {
    std::vector<double> w1, b1, w2, b2;

    explicit Gradients(const NNModel& m)
        : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0), b2(m.b2.size(), 0.0) {}

    void zero() {
        std::fill(w1.begin(), w1.end(), 0.0);
        std::fill(b1.begin(), b1.end(), 0.0);
        std::fill(w2.begin(), w2.end(), 0.0);
        std::fill(b2.begin(), b2.end(), 0.0);
    }
};

// Cross-entropy backprop for one normalized sample; accumulates into g.
void backward(const NNModel& m, const std::array<double, kFeatureCount>& z, int y,
              const Forward& f, Gradients& g) {
    std::vector<double> dout(m.outputs);
    for (int o = 0; o < m.outputs; ++o)
        dout[o] = f.out[o] - (o == y ? 1.0 : 0.0);

    std::vector<double> dhidden(m.hidden, 0.0);
    for (int o = 0; o < m.outputs; ++o) {
        double* gw = g.w2.data() + static_cast<std::size_t>(o) * m.hidden;
        const double* w = m.w2.data() + static_cast<std::size_t>(o) * m.hidden;
        for (int j = 0; j < m.hidden; ++j) {
            gw[j] += dout[o] * f.hidden[j];
            dhidden[j] += dout[o] * w[j];
        }
        g.b2[o] += dout[o];
    }
    for (int j = 0; j < m.hidden; ++j) {
        const double dz = dhidden[j] * f.hidden[j] * (1.0 - f.hidden[j]);
        double* gw = g.w1.data() + static_cast<std::size_t>(j) * m.inputs;
        for (int i = 0; i < m.inputs; ++i) gw[i] += dz * z[i];
        g.b1[j] += dz;
    }
}

} // namespace

NNModel train_nn(const std::vector<LabeledSample>& data, Target target, const NNParams& params) {
    if (data.empty())
        throw FormatError("train_nn: no samples");
    if (params.hidden_neurons < 1)
        throw FormatError("train_nn: need at least one hidden neuron");

    const int n_classes = class_count(target);
    std::vector<std::array<double, kFeatureCount>> raw;
    std::vector<int> ys;
    raw.reserve(data.size());
    ys.reserve(data.size());
    for (const auto& s : data) {
        raw.push_back(s.features.to_array());
        const int y = label_of(s, target);
        if (y < 0 || y >= n_classes) throw FormatError("train_nn: label out of range");
        ys.push_back(y);
    }

    NNModel m;
    m.target = target;
    m.hidden = params.hidden_neurons;
    m.outputs = n_classes;

    // z-score stats from the training data; flat features clamp to std 1
    const double n = static_cast<double>(raw.size());
    for (int i = 0; i < kFeatureCount; ++i) {
        double mean = 0.0;
        for (const auto& r : raw) mean += r[i];
        mean /= n;
        double var = 0.0;
        for (const auto& r : raw) var += (r[i] - mean) * (r[i] - mean);
        var /= n;
        m.feat_mean[i] = mean;
        m.feat_std[i] = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    std::vector<std::array<double, kFeatureCount>> zs(raw.size());
    for (std::size_t s = 0; s < raw.size(); ++s) zs[s] = normalize(m, raw[s]);

    std::mt19937 rng(params.seed);
    const double r1 = std::sqrt(6.0 / (m.inputs + m.hidden));
    const double r2 = std::sqrt(6.0 / (m.hidden + m.outputs));
    m.w1.resize(static_cast<std::size_t>(m.hidden) * m.inputs);
    m.b1.assign(m.hidden, 0.0);
    m.w2.resize(static_cast<std::size_t>(m.outputs) * m.hidden);
    m.b2.assign(m.outputs, 0.0);
    std::uniform_real_distribution<double> u1(-r1, r1), u2(-r2, r2);
    for (double& w : m.w1) w = u1(rng);
    for (double& w : m.w2) w = u2(rng);

    std::vector<std::size_t> order(zs.size());
    std::iota(order.begin(), order.end(), 0);
    Gradients g(m);
    const int batch = std::max(1, params.batch_size);

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            g.zero();
            for (std::size_t p = start; p < end; ++p) {
                const std::size_t s = order[p];
                const Forward f = forward(m, zs[s]);
                backward(m, zs[s], ys[s], f, g);
            }
            const double scale = params.learning_rate / static_cast<double>(end - start);
            for (std::size_t i = 0; i < m.w1.size(); ++i) m.w1[i] -= scale * g.w1[i];
            for (std::size_t i = 0; i < m.b1.size(); ++i) m.b1[i] -= scale * g.b1[i];
            for (std::size_t i = 0; i < m.w2.size(); ++i) m.w2[i] -= scale * g.w2[i];
            for (std::size_t i = 0; i < m.b2.size(); ++i) m.b2[i] -= scale * g.b2[i];
        }
    }
    return m;
}

std::vector<double> nn_posterior(const NNModel& m, const FeatureVector17& fv) {
    return forward(m, normalize(m, fv.to_array())).out;
}

Prediction predict(const NNModel& m, const FeatureVector17& fv) {
    const std::vector<double> post = nn_posterior(m, fv);
    int best = 0;
    for (int c = 1; c < static_cast<int>(post.size()); ++c)
        if (post[c] > post[best]) best = c;
    return {best, post[best]};
}

std::vector<double> nn_pack(const NNModel& m) {
    std::vector<double> p;
    p.reserve(m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size());
    p.insert(p.end(), m.w1.begin(), m.w1.end());
    p.insert(p.end(), m.b1.begin(), m.b1.end());
    p.insert(p.end(), m.w2.begin(), m.w2.end());
    p.insert(p.end(), m.b2.begin(), m.b2.end());
    return p;
}

void nn_unpack(NNModel& m, const std::vector<double>& params) {
    const std::size_t expect = m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size();
    if (params.size() != expect)
        throw FormatError("nn_unpack: parameter count mismatch");
    auto it = params.begin();
    std::copy(it, it + m.w1.size(), m.w1.begin());
    it += static_cast<std::ptrdiff_t>(m.w1.size());
    std::copy(it, it + m.b1.size(), m.b1.begin());
    it += static_cast<std::ptrdiff_t>(m.b1.size());
    std::copy(it, it + m.w2.size(), m.w2.begin());
    it += static_cast<std::ptrdiff_t>(m.w2.size());
    std::copy(it, it + m.b2.size(), m.b2.begin());
}

double nn_loss(const NNModel& m, const std::vector<FeatureVector17>& xs,
               const std::vector<int>& ys) {
    if (xs.size() != ys.size() || xs.empty())
        throw FormatError("nn_loss: bad input sizes");
    double acc = 0.0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const Forward f = forward(m, normalize(m, xs[s].to_array()));
        acc += -std::log(std::max(f.out[ys[s]], 1e-300));
    }
    return acc / static_cast<double>(xs.size());
}

std::vector<double> nn_gradient(const NNModel& m, const std::vector<FeatureVector17>& xs,
                                const std::vector<int>& ys) {
    if (xs.size() != ys.size() || xs.empty())
        throw FormatError("nn_gradient: bad input sizes");
    Gradients g(m);
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const auto z = normalize(m, xs[s].to_array());
        const Forward f = forward(m, z);
        backward(m, z, ys[s], f, g);
    }
    const double inv = 1.0 / static_cast<double>(xs.size());
    std::vector<double> out;
    out.reserve(g.w1.size() + g.b1.size() + g.w2.size() + g.b2.size());
    for (double v : g.w1) out.push_back(v * inv);
    for (double v : g.b1) out.push_back(v * inv);
    for (double v : g.w2) out.push_back(v * inv);
    for (double v : g.b2) out.push_back(v * inv);
    return out;
}

} // namespace roidiff::classifier
