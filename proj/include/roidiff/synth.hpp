/**
 * @file synth.hpp
 * @brief Deterministic synthetic page-pair generator with a built-in
 *        labeling oracle for perceptible rendering differences.
 *
 * The oracle applies fixed visibility rules: an element counts as a true
 * incompatibility when it is deleted, moved by more than 40 px, resized by
 * more than 15 px, or recolored by a mean per-channel delta of 32 or more.
 * Sub-pixel jitter and antialias-style edge noise model imperceptible
 * rendering differences and are labeled false positives.
 */
#ifndef ROIDIFF_SYNTH_HPP
#define ROIDIFF_SYNTH_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roidiff/raster.hpp"

namespace roidiff::synth {

enum class ElementKind { Box, Bar, TextBlock };

struct Element {
    ElementKind kind = ElementKind::Box;
    Box bbox;
    std::array<std::uint8_t, 3> fill{0, 0, 0};
    bool border = false;
    std::uint32_t texture_seed = 0;    // stable per element, drives textblock content
    std::uint32_t texture_variant = 0; // bumping it swaps the rendered content
};

struct PageSpec {
    int width = 800;
    int height = 1200;
    std::array<std::uint8_t, 3> background{235, 235, 235};
    std::vector<Element> elements;
    std::uint32_t seed = 0;
    int noise_level = 0; // +- per-channel jitter applied next to intensity edges
    std::uint32_t noise_seed = 0;
};

/// Deterministic rasterization; identical spec gives identical bytes.
Raster render(const PageSpec& spec);

enum class PerturbationKind {
    Shift,          // move the element vertically (horizontally when cramped)
    Resize,         // grow width and height
    Delete,         // remove the element
    Recolor,        // move the fill toward the background
    TextureSwap,    // re-render a textblock with different content
    SubpixelJitter, // 1..3 px displacement
    AntialiasNoise  // page-level edge noise
};

enum class OracleLabel { FalsePositive, Incompatibility };

struct Perturbation {
    PerturbationKind kind = PerturbationKind::Shift;
    double magnitude = 0.0;
    std::size_t target = 0; // element index; unused for AntialiasNoise
};

/// One perturbed element with its ground-truth label and both locations.
struct ElementOracle {
    PerturbationKind kind;
    OracleLabel label = OracleLabel::FalsePositive;
    Box base_bbox;
    std::optional<Box> test_bbox; // absent for deletions
};

struct PerturbResult {
    PageSpec page;
    ElementOracle oracle;
};

/// Apply one perturbation. The label reflects the applied magnitude after
/// clamping at canvas bounds, not the requested one.
PerturbResult perturb(const PageSpec& spec, const Perturbation& p);

struct CorpusPair {
    int id = 0;
    int config_index = 1; // simulated browser-platform combination, 1..14
    PageSpec baseline;
    PageSpec under_test;
    std::vector<ElementOracle> oracle;
};

/// Exact perturbation counts for a corpus. Counts beyond the number of
/// non-clean pages stack as multiple perturbations per page.
struct CorpusMix {
    int clean = 0;
    int shift_defects = 0;   // > 40 px moves
    int delete_defects = 0;
    int recolor_defects = 0; // strong recolor toward the background
    int texture_defects = 0; // changed textblock content
    int resize_defects = 0;  // grows beyond the 15 px visibility rule
    int resize_noise = 0;    // grows below the 15 px visibility rule
    int recolor_noise = 0;   // below the visible-delta threshold
    int jitter_noise = 0;    // 1..3 px displacement inside a cluster
    int antialias_noise = 0; // page-level edge noise

    int total_pages() const {
        return clean + shift_defects + delete_defects + recolor_defects + texture_defects +
               resize_defects + resize_noise + recolor_noise + jitter_noise + antialias_noise;
    }
};

/// Deterministic corpus of page pairs honoring the mix exactly.
/// Throws FormatError when n_pages < 1 or the mix does not fit.
std::vector<CorpusPair> gen_corpus(int n_pages, std::uint32_t seed, const CorpusMix& mix);

/// Mix whose per-kind counts are proportional to n (used by the CLI).
CorpusMix default_mix(int n_pages);

std::string kind_name(PerturbationKind k);
PerturbationKind kind_from_name(const std::string& name);

/// Severity class C1..C4 (as index 0..3) derived from the perturbation kind
/// and its oracle label, used to label quaternary training samples.
int severity_class(PerturbationKind k, OracleLabel label);

} // namespace roidiff::synth

#endif
