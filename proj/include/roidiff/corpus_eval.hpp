/**
 * @file corpus_eval.hpp
 * @brief Corpus-level evaluation against the synthetic oracle: manifest
 *        files, defect/flag matching, precision-recall tables and labeled
 *        sample extraction for classifier training.
 */
#ifndef ROIDIFF_CORPUS_EVAL_HPP
#define ROIDIFF_CORPUS_EVAL_HPP

#include <optional>
#include <string>
#include <vector>

#include "roidiff/pipeline.hpp"
#include "roidiff/synth.hpp"

namespace roidiff::corpus_eval {

struct LoadedPair {
    int id = 0;
    int config_index = 1;
    Raster baseline;
    Raster under_test;
    std::vector<synth::ElementOracle> oracle;
};

/// Render a corpus into <outdir>/pair_NNNN_{base,test}.png plus
/// manifest.json listing image paths and oracle labels.
void write_corpus(const std::string& outdir, const std::vector<synth::CorpusPair>& corpus);

std::vector<LoadedPair> load_manifest(const std::string& manifest_path);

std::vector<LoadedPair> materialize(const std::vector<synth::CorpusPair>& corpus);

struct Counts {
    std::size_t flags = 0;           // flagged ROI pairs
    std::size_t flags_on_defect = 0; // flags overlapping a true-defect element
    std::size_t defects = 0;         // oracle incompatibility elements
    std::size_t defects_detected = 0;
    std::size_t pages = 0;
    std::size_t page_true_positive = 0;
    std::size_t page_false_positive = 0;
    std::size_t page_false_negative = 0;
    std::size_t page_true_negative = 0;

    double pair_precision() const {
        return flags ? static_cast<double>(flags_on_defect) / static_cast<double>(flags) : 0.0;
    }
    double pair_recall() const {
        return defects ? static_cast<double>(defects_detected) / static_cast<double>(defects) : 0.0;
    }
    double pair_f_score() const {
        const double p = pair_precision();
        const double r = pair_recall();
        return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
    double page_accuracy() const {
        return pages ? static_cast<double>(page_true_positive + page_true_negative) /
                           static_cast<double>(pages)
                     : 0.0;
    }
};

struct EvalResult {
    Counts bare;
    std::optional<Counts> filtered; // present when a model was supplied
};

/// Run the pipeline over every pair (optionally in parallel) and score the
/// flags and page verdicts against the oracle. Results are deterministic
/// regardless of the worker count.
EvalResult evaluate(const std::vector<LoadedPair>& pairs, const pipeline::PipelineConfig& cfg,
                    const classifier::Model* model, int threads);

/// Bare-bones flags of every pair, labeled by the oracle: binary label 1
/// when the flag overlaps a true-defect element, plus a severity class
/// derived from the covered perturbation.
std::vector<classifier::LabeledSample> extract_labeled_samples(
    const std::vector<LoadedPair>& pairs, const pipeline::PipelineConfig& cfg, int threads);

/// Worker count: explicit > ROIDIFF_THREADS > hardware concurrency.
int resolve_threads(int requested);

/// Evaluation profile for the synthetic corpora: a sharper corner threshold
/// and matching tolerances well below the human visibility rules, so that
/// imperceptible rendering jitter surfaces as potential findings for the
/// classifier to filter.
pipeline::PipelineConfig synthetic_eval_config();

} // namespace roidiff::corpus_eval

#endif
