/**
 * @file dataset.hpp
 * @brief Golden-standard construction: balanced sampling and multi-rater
 *        label aggregation.
 */
#ifndef ROIDIFF_DATASET_HPP
#define ROIDIFF_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "roidiff/classifier.hpp"

namespace roidiff::dataset {

struct RatedPair {
    std::string pair_id;
    std::vector<int> ratings; // class values 1..4
    std::vector<std::string> rater_ids;
};

/// Keep the first `per_class_target` samples of each binary class, in input
/// order. Throws FormatError naming the deficit when a class is short.
std::vector<classifier::LabeledSample> balance_binary(
    const std::vector<classifier::LabeledSample>& samples, std::size_t per_class_target);

/// Seeded random subset of `trim_to` ratings, order-preserving.
std::vector<int> trim_ratings(const std::vector<int>& ratings, std::size_t trim_to,
                              std::uint32_t seed);

/// Trim to `trim_to` ratings, average, round half-up. Returns a class value
/// in 1..4. Throws FormatError when fewer than trim_to ratings exist.
int aggregate_ratings(const RatedPair& rp, std::size_t trim_to, std::uint32_t seed);

/// Ratings CSV: header pair_id,rater_id,class; one row per rating.
/// Rows whose class is not 1..4 (binary p/n ratings) are skipped.
std::vector<RatedPair> load_ratings_csv(const std::string& path);

} // namespace roidiff::dataset

#endif
