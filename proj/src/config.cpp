#include "roidiff/config.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace roidiff {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

} // namespace

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);

    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    RunConfig cfg;
    auto geti = [&](const char* key, int def) {
        const auto it = kv.find(key);
        return it == kv.end() ? def : std::stoi(it->second);
    };
    auto getd = [&](const char* key, double def) {
        const auto it = kv.find(key);
        return it == kv.end() ? def : std::stod(it->second);
    };
    auto gets = [&](const char* key, std::string def) {
        const auto it = kv.find(key);
        return it == kv.end() ? def : it->second;
    };

    cfg.schema_version = geti("schema_version", 1);
    if (cfg.schema_version != 1)
        throw FormatError("unsupported config schema version in " + path);

    auto& seg = cfg.pipeline.seg;
    seg.max_dilation_extent = geti("seg.max_dilation_extent", seg.max_dilation_extent);
    seg.min_dilation_extent = geti("seg.min_dilation_extent", seg.min_dilation_extent);
    seg.max_roi_side = geti("seg.max_roi_side", seg.max_roi_side);
    seg.h_extent_scale = getd("seg.h_extent_scale", seg.h_extent_scale);
    seg.v_extent_scale = getd("seg.v_extent_scale", seg.v_extent_scale);
    seg.harris.window_sigma = getd("harris.sigma", seg.harris.window_sigma);
    seg.harris.k = getd("harris.k", seg.harris.k);
    seg.harris.rel_threshold = getd("harris.threshold", seg.harris.rel_threshold);
    const std::string kernel = gets("harris.kernel", "sobel");
    if (kernel != "sobel" && kernel != "scharr")
        throw FormatError("harris.kernel must be sobel or scharr");
    seg.harris.kernel = kernel == "scharr" ? imaging::GradientKernel::Scharr
                                           : imaging::GradientKernel::Sobel;

    auto& match = cfg.pipeline.match;
    match.centroid_tol = getd("match.centroid_tol", match.centroid_tol);
    match.size_tol = getd("match.size_tol", match.size_tol);
    match.orientation_tol = getd("match.orientation_tol", match.orientation_tol);
    match.search_tolerance = geti("match.search_tolerance", match.search_tolerance);
    match.ssd_threshold = getd("match.ssd_threshold", match.ssd_threshold);

    cfg.pipeline.config_index = geti("config_index", cfg.pipeline.config_index);
    cfg.seed = static_cast<std::uint32_t>(geti("seed", static_cast<int>(cfg.seed)));
    cfg.model_path = gets("model", cfg.model_path);
    cfg.threads = geti("threads", cfg.threads);
    return cfg;
}

void RunConfig::save(const std::string& path) const {
    std::ostringstream out;
    out << "schema_version = " << schema_version << "\n";
    out << "seg.max_dilation_extent = " << pipeline.seg.max_dilation_extent << "\n";
    out << "seg.min_dilation_extent = " << pipeline.seg.min_dilation_extent << "\n";
    out << "seg.max_roi_side = " << pipeline.seg.max_roi_side << "\n";
    out << "seg.h_extent_scale = " << pipeline.seg.h_extent_scale << "\n";
    out << "seg.v_extent_scale = " << pipeline.seg.v_extent_scale << "\n";
    out << "harris.sigma = " << pipeline.seg.harris.window_sigma << "\n";
    out << "harris.k = " << pipeline.seg.harris.k << "\n";
    out << "harris.threshold = " << pipeline.seg.harris.rel_threshold << "\n";
    out << "harris.kernel = "
        << (pipeline.seg.harris.kernel == imaging::GradientKernel::Scharr ? "scharr" : "sobel")
        << "\n";
    out << "match.centroid_tol = " << pipeline.match.centroid_tol << "\n";
    out << "match.size_tol = " << pipeline.match.size_tol << "\n";
    out << "match.orientation_tol = " << pipeline.match.orientation_tol << "\n";
    out << "match.search_tolerance = " << pipeline.match.search_tolerance << "\n";
    out << "match.ssd_threshold = " << pipeline.match.ssd_threshold << "\n";
    out << "config_index = " << pipeline.config_index << "\n";
    out << "seed = " << seed << "\n";
    if (!model_path.empty()) out << "model = " << model_path << "\n";
    if (threads > 0) out << "threads = " << threads << "\n";

    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot create config file: " + tmp.string());
        f << out.str();
    }
    std::filesystem::rename(tmp, target);
}

} // namespace roidiff
