#include "roidiff/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace roidiff::dataset {

std::vector<classifier::LabeledSample> balance_binary(
    const std::vector<classifier::LabeledSample>& samples, std::size_t per_class_target) {
    std::size_t kept_pos = 0, kept_neg = 0;
    std::vector<classifier::LabeledSample> out;
    out.reserve(2 * per_class_target);
    for (const auto& s : samples) {
        const int y = classifier::label_of(s, classifier::Target::Binary);
        if (y == classifier::kIncompatibility) {
            if (kept_pos < per_class_target) {
                out.push_back(s);
                ++kept_pos;
            }
        } else if (kept_neg < per_class_target) {
            out.push_back(s);
            ++kept_neg;
        }
    }
    if (kept_pos < per_class_target || kept_neg < per_class_target) {
        std::ostringstream msg;
        msg << "balance_binary: need " << per_class_target << " per class, found "
            << kept_pos << " incompatibility and " << kept_neg << " false_positive samples";
        throw FormatError(msg.str());
    }
    return out;
}

std::vector<int> trim_ratings(const std::vector<int>& ratings, std::size_t trim_to,
                              std::uint32_t seed) {
    if (ratings.size() < trim_to)
        throw FormatError("trim_ratings: fewer ratings than the trim count");
    std::vector<std::size_t> idx(ratings.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(trim_to);
    std::sort(idx.begin(), idx.end()); // keep the surviving ratings in input order
    std::vector<int> out;
    out.reserve(trim_to);
    for (std::size_t i : idx) out.push_back(ratings[i]);
    return out;
}

int aggregate_ratings(const RatedPair& rp, std::size_t trim_to, std::uint32_t seed) {
    for (int r : rp.ratings)
        if (r < 1 || r > 4) throw FormatError("aggregate_ratings: rating outside 1..4");
    const std::vector<int> trimmed = trim_ratings(rp.ratings, trim_to, seed);
    const double mean = static_cast<double>(std::accumulate(trimmed.begin(), trimmed.end(), 0)) /
                        static_cast<double>(trimmed.size());
    return static_cast<int>(std::floor(mean + 0.5)); // round half-up
}

std::vector<RatedPair> load_ratings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ratings CSV: " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError("ratings CSV is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "pair_id,rater_id,class")
        throw FormatError("ratings CSV header must be pair_id,rater_id,class");

    std::map<std::string, RatedPair> pairs; // keyed for dedup, ordered for determinism
    std::vector<std::string> order;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string pair_id, rater_id, cls;
        if (!std::getline(ss, pair_id, ',') || !std::getline(ss, rater_id, ',') ||
            !std::getline(ss, cls))
            throw FormatError("ratings CSV row " + std::to_string(lineno) + " is malformed");
        if (cls.size() != 1 || cls[0] < '1' || cls[0] > '4') continue; // binary p/n rows
        auto [it, inserted] = pairs.try_emplace(pair_id);
        if (inserted) {
            it->second.pair_id = pair_id;
            order.push_back(pair_id);
        }
        it->second.ratings.push_back(cls[0] - '0');
        it->second.rater_ids.push_back(rater_id);
    }

    std::vector<RatedPair> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(pairs[id]);
    return out;
}

} // namespace roidiff::dataset
