#include "roidiff/classifier.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace roidiff::classifier {

namespace {

using nlohmann::json;

constexpr int kModelSchema = 1;

std::string target_name(Target t) { return t == Target::Binary ? "binary" : "quaternary"; }

Target target_from(const std::string& s) {
    if (s == "binary") return Target::Binary;
    if (s == "quaternary") return Target::Quaternary;
    throw FormatError("unknown classification target: " + s);
}

json tree_to_json(const TreeModel& m) {
    json nodes = json::array();
    for (const auto& n : m.nodes) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"counts", n.class_counts}});
    }
    return {{"schema_version", kModelSchema},
            {"model", "tree"},
            {"target", target_name(m.target)},
            {"pruning_level", m.pruning_level},
            {"nodes", nodes}};
}

TreeModel tree_from_json(const json& j) {
    TreeModel m;
    m.target = target_from(j.at("target").get<std::string>());
    m.pruning_level = j.at("pruning_level").get<int>();
    for (const auto& jn : j.at("nodes")) {
        TreeNode n;
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.class_counts = jn.at("counts").get<std::vector<std::int64_t>>();
        m.nodes.push_back(std::move(n));
    }
    if (m.nodes.empty()) throw FormatError("tree model has no nodes");
    const int n = static_cast<int>(m.nodes.size());
    const int classes = class_count(m.target);
    for (const auto& node : m.nodes) {
        if (node.class_counts.size() != static_cast<std::size_t>(classes))
            throw FormatError("tree node has wrong class count");
        const bool leaf = node.feature < 0;
        if (leaf && (node.left >= 0 || node.right >= 0))
            throw FormatError("tree leaf with children");
        if (!leaf && (node.feature >= kFeatureCount || node.left < 0 || node.left >= n ||
                      node.right < 0 || node.right >= n))
            throw FormatError("tree node references are out of range");
    }
    return m;
}

json nn_to_json(const NNModel& m) {
    return {{"schema_version", kModelSchema},
            {"model", "nn"},
            {"target", target_name(m.target)},
            {"inputs", m.inputs},
            {"hidden", m.hidden},
            {"outputs", m.outputs},
            {"w1", m.w1},
            {"b1", m.b1},
            {"w2", m.w2},
            {"b2", m.b2},
            {"feat_mean", m.feat_mean},
            {"feat_std", m.feat_std}};
}

NNModel nn_from_json(const json& j) {
    NNModel m;
    m.target = target_from(j.at("target").get<std::string>());
    m.inputs = j.at("inputs").get<int>();
    m.hidden = j.at("hidden").get<int>();
    m.outputs = j.at("outputs").get<int>();
    m.w1 = j.at("w1").get<std::vector<double>>();
    m.b1 = j.at("b1").get<std::vector<double>>();
    m.w2 = j.at("w2").get<std::vector<double>>();
    m.b2 = j.at("b2").get<std::vector<double>>();
    const auto mean = j.at("feat_mean").get<std::vector<double>>();
    const auto std_ = j.at("feat_std").get<std::vector<double>>();
    if (m.inputs != kFeatureCount || mean.size() != kFeatureCount || std_.size() != kFeatureCount)
        throw FormatError("nn model has wrong input dimension");
    if (m.w1.size() != static_cast<std::size_t>(m.hidden) * m.inputs ||
        m.b1.size() != static_cast<std::size_t>(m.hidden) ||
        m.w2.size() != static_cast<std::size_t>(m.outputs) * m.hidden ||
        m.b2.size() != static_cast<std::size_t>(m.outputs))
        throw FormatError("nn model has inconsistent layer sizes");
    std::copy(mean.begin(), mean.end(), m.feat_mean.begin());
    std::copy(std_.begin(), std_.end(), m.feat_std.begin());
    for (double s : m.feat_std)
        if (s <= 0.0) throw FormatError("nn model has non-positive feature std");
    return m;
}

void atomic_write_text(const std::string& path, const std::string& text) {
    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create file: " + tmp.string());
        out << text;
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

const std::array<std::string, kFeatureCount> kCsvFeatureColumns = {
    "h0", "h1", "h2", "h3", "h4", "h5", "h6", "h7", "h8", "h9",
    "correlation", "x", "y", "w", "h", "config_index", "mismatch_density"};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

} // namespace

std::string model_to_json(const Model& m) {
    const json j = std::holds_alternative<TreeModel>(m) ? tree_to_json(std::get<TreeModel>(m))
                                                        : nn_to_json(std::get<NNModel>(m));
    return j.dump(2) + "\n";
}

Model model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("model JSON parse error: ") + e.what());
    }
    if (j.value("schema_version", -1) != kModelSchema)
        throw FormatError("unsupported model schema version");
    const std::string kind = j.at("model").get<std::string>();
    if (kind == "tree") return tree_from_json(j);
    if (kind == "nn") return nn_from_json(j);
    throw FormatError("unknown model kind: " + kind);
}

void save_model(const Model& m, const std::string& path) {
    atomic_write_text(path, model_to_json(m));
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

std::vector<LabeledSample> load_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError("CSV is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_csv_line(line);
    std::vector<std::string> expected(kCsvFeatureColumns.begin(), kCsvFeatureColumns.end());
    expected.push_back("binary_label");
    expected.push_back("quaternary_label");
    if (header != expected)
        throw FormatError("CSV header mismatch in " + path +
                          " (expected h0..h9,correlation,x,y,w,h,config_index,"
                          "mismatch_density,binary_label,quaternary_label)");

    std::vector<LabeledSample> samples;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != expected.size())
            throw FormatError("CSV row " + std::to_string(lineno) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(expected.size()));
        std::array<double, kFeatureCount> a{};
        try {
            for (int i = 0; i < kFeatureCount; ++i) a[i] = std::stod(cells[i]);
        } catch (const std::exception&) {
            throw FormatError("CSV row " + std::to_string(lineno) + ": bad numeric cell");
        }
        LabeledSample s;
        s.features = FeatureVector17::from_array(a);
        const std::string& bin = cells[kFeatureCount];
        const std::string& quat = cells[kFeatureCount + 1];
        if (!bin.empty()) {
            if (bin != "0" && bin != "1")
                throw FormatError("CSV row " + std::to_string(lineno) + ": binary label must be 0 or 1");
            s.binary_label = bin == "1" ? 1 : 0;
        }
        if (!quat.empty()) {
            if (quat.size() != 1 || quat[0] < '1' || quat[0] > '4')
                throw FormatError("CSV row " + std::to_string(lineno) + ": quaternary label must be 1..4");
            s.quaternary_label = quat[0] - '1';
        }
        if (!s.binary_label && !s.quaternary_label)
            throw FormatError("CSV row " + std::to_string(lineno) + ": no label present");
        samples.push_back(std::move(s));
    }
    return samples;
}

void save_samples_csv(const std::string& path, const std::vector<LabeledSample>& samples) {
    std::ostringstream out;
    for (int i = 0; i < kFeatureCount; ++i) out << kCsvFeatureColumns[i] << ',';
    out << "binary_label,quaternary_label\n";
    out.precision(17);
    for (const auto& s : samples) {
        const auto a = s.features.to_array();
        for (double v : a) out << v << ',';
        if (s.binary_label) out << *s.binary_label;
        out << ',';
        if (s.quaternary_label) out << (*s.quaternary_label + 1);
        out << '\n';
    }
    atomic_write_text(path, out.str());
}

} // namespace roidiff::classifier
