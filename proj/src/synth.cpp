#include "roidiff/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "roidiff/imaging.hpp"

namespace roidiff::synth {

namespace {

void fill_rect(Raster& img, const Box& b, const std::array<std::uint8_t, 3>& color) {
    const int x0 = std::max(0, b.x);
    const int y0 = std::max(0, b.y);
    const int x1 = std::min(img.width(), b.right());
    const int y1 = std::min(img.height(), b.bottom());
    for (int y = y0; y < y1; ++y) {
        std::uint8_t* row = img.row(y);
        for (int x = x0; x < x1; ++x) {
            std::uint8_t* p = row + static_cast<std::size_t>(x) * 3;
            p[0] = color[0];
            p[1] = color[1];
            p[2] = color[2];
        }
    }
}

std::array<std::uint8_t, 3> darken(const std::array<std::uint8_t, 3>& c, double f) {
    return {static_cast<std::uint8_t>(c[0] * f), static_cast<std::uint8_t>(c[1] * f),
            static_cast<std::uint8_t>(c[2] * f)};
}

void draw_textblock(Raster& img, const Element& e) {
    std::mt19937 rng(e.texture_seed + 0x9E3779B9u * (e.texture_variant + 1));
    std::uniform_int_distribution<int> dash_w(10, 26);
    std::uniform_int_distribution<int> gap_w(5, 12);
    std::uniform_int_distribution<int> tone(-18, 18);

    const int margin = 4;
    const int line_pitch = 16;
    const int dash_h = 9;
    const int phase = static_cast<int>(e.texture_variant % 3) * 5;
    for (int ly = e.bbox.y + margin + phase; ly + dash_h <= e.bbox.bottom() - margin;
         ly += line_pitch) {
        int x = e.bbox.x + margin;
        const int x_end = e.bbox.right() - margin;
        while (x < x_end) {
            const int w = std::min(dash_w(rng), x_end - x);
            const int t = tone(rng);
            std::array<std::uint8_t, 3> c;
            for (int ch = 0; ch < 3; ++ch)
                c[ch] = static_cast<std::uint8_t>(std::clamp(e.fill[ch] + t, 0, 255));
            if (w >= 4) fill_rect(img, Box{x, ly, w, dash_h}, c);
            x += w + gap_w(rng);
        }
    }
}

void apply_edge_noise(Raster& img, int level, std::uint32_t seed) {
    const Raster gray = imaging::to_grayscale(img);
    const int w = img.width();
    const int h = img.height();
    std::vector<std::uint8_t> edge(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int v = gray.at(x, y);
            const bool e = (x > 0 && std::abs(v - gray.at(x - 1, y)) > 24) ||
                           (x + 1 < w && std::abs(v - gray.at(x + 1, y)) > 24) ||
                           (y > 0 && std::abs(v - gray.at(x, y - 1)) > 24) ||
                           (y + 1 < h && std::abs(v - gray.at(x, y + 1)) > 24);
            edge[static_cast<std::size_t>(y) * w + x] = e;
        }
    }
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> jitter(-level, level);
    for (int y = 0; y < h; ++y) {
        std::uint8_t* row = img.row(y);
        for (int x = 0; x < w; ++x) {
            if (!edge[static_cast<std::size_t>(y) * w + x]) continue;
            const int d = jitter(rng);
            std::uint8_t* p = row + static_cast<std::size_t>(x) * 3;
            for (int ch = 0; ch < 3; ++ch)
                p[ch] = static_cast<std::uint8_t>(std::clamp(static_cast<int>(p[ch]) + d, 0, 255));
        }
    }
}

} // namespace

Raster render(const PageSpec& spec) {
    if (spec.width < 1 || spec.height < 1)
        throw FormatError("render: invalid canvas size");
    Raster img(spec.width, spec.height, 3);
    fill_rect(img, Box{0, 0, spec.width, spec.height}, spec.background);

    for (const Element& e : spec.elements) {
        switch (e.kind) {
            case ElementKind::Box:
                fill_rect(img, e.bbox, e.fill);
                if (e.border) {
                    const auto edge = darken(e.fill, 0.55);
                    fill_rect(img, Box{e.bbox.x, e.bbox.y, e.bbox.width, 1}, edge);
                    fill_rect(img, Box{e.bbox.x, e.bbox.bottom() - 1, e.bbox.width, 1}, edge);
                    fill_rect(img, Box{e.bbox.x, e.bbox.y, 1, e.bbox.height}, edge);
                    fill_rect(img, Box{e.bbox.right() - 1, e.bbox.y, 1, e.bbox.height}, edge);
                }
                break;
            case ElementKind::Bar:
                fill_rect(img, e.bbox, e.fill);
                break;
            case ElementKind::TextBlock:
                draw_textblock(img, e);
                break;
        }
    }

    if (spec.noise_level > 0)
        apply_edge_noise(img, spec.noise_level, spec.noise_seed);
    return img;
}

namespace {

int clamp_move(int want, int lo_room, int hi_room) {
    // positive direction preferred; falls back to the other side
    if (want <= hi_room) return want;
    if (want <= lo_room) return -want;
    return hi_room >= lo_room ? std::max(0, hi_room) : -std::max(0, lo_room);
}

} // namespace

PerturbResult perturb(const PageSpec& spec, const Perturbation& p) {
    PerturbResult res;
    res.page = spec;
    res.oracle.kind = p.kind;

    if (p.kind == PerturbationKind::AntialiasNoise) {
        const int level = std::max(1, static_cast<int>(std::lround(p.magnitude)));
        res.page.noise_level = level;
        res.page.noise_seed = spec.seed ^ 0xA5A5A5A5u;
        res.oracle.label = OracleLabel::FalsePositive;
        res.oracle.base_bbox = Box{0, 0, spec.width, spec.height};
        res.oracle.test_bbox = res.oracle.base_bbox;
        return res;
    }

    if (p.target >= spec.elements.size())
        throw FormatError("perturb: target element does not exist");
    Element& e = res.page.elements[p.target];
    res.oracle.base_bbox = e.bbox;

    const int mag = static_cast<int>(std::lround(p.magnitude));
    switch (p.kind) {
        case PerturbationKind::Shift: {
            const int down_room = spec.height - e.bbox.bottom();
            const int up_room = e.bbox.y;
            const int applied = clamp_move(mag, up_room, down_room);
            e.bbox.y += applied;
            res.oracle.label = std::abs(applied) > 40 ? OracleLabel::Incompatibility
                                                      : OracleLabel::FalsePositive;
            break;
        }
        case PerturbationKind::SubpixelJitter: {
            const int j = std::clamp(mag, 1, 3);
            const int down_room = spec.height - e.bbox.bottom();
            const int applied = clamp_move(j, e.bbox.y, down_room);
            e.bbox.y += applied;
            res.oracle.label = OracleLabel::FalsePositive;
            break;
        }
        case PerturbationKind::Resize: {
            const int dw = std::min(mag, spec.width - e.bbox.right());
            const int dh = std::min(mag, spec.height - e.bbox.bottom());
            e.bbox.width += dw;
            e.bbox.height += dh;
            res.oracle.label = std::max(dw, dh) > 15 ? OracleLabel::Incompatibility
                                                     : OracleLabel::FalsePositive;
            break;
        }
        case PerturbationKind::Delete: {
            res.page.elements.erase(res.page.elements.begin() +
                                    static_cast<std::ptrdiff_t>(p.target));
            res.oracle.label = OracleLabel::Incompatibility;
            res.oracle.test_bbox.reset();
            return res;
        }
        case PerturbationKind::Recolor: {
            // move each channel toward the background by up to |magnitude|
            double applied_sum = 0.0;
            for (int ch = 0; ch < 3; ++ch) {
                const int dist = static_cast<int>(spec.background[ch]) - e.fill[ch];
                const int step = std::min(mag, std::abs(dist));
                const int moved = dist >= 0 ? step : -step;
                e.fill[ch] = static_cast<std::uint8_t>(e.fill[ch] + moved);
                applied_sum += std::abs(moved);
            }
            res.oracle.label = applied_sum / 3.0 >= 32.0 ? OracleLabel::Incompatibility
                                                         : OracleLabel::FalsePositive;
            break;
        }
        case PerturbationKind::TextureSwap: {
            if (e.kind != ElementKind::TextBlock)
                throw FormatError("perturb: texture swap needs a textblock target");
            ++e.texture_variant;
            res.oracle.label = OracleLabel::Incompatibility; // element content changed
            break;
        }
        case PerturbationKind::AntialiasNoise:
            break; // handled above
    }
    res.oracle.test_bbox = e.bbox;
    return res;
}

namespace {

struct PagePlan {
    PageSpec spec;
    std::vector<std::size_t> dark_singles; // shift/delete/recolor-defect targets
    std::vector<std::size_t> textblocks;   // texture-swap targets (dark)
    std::vector<std::size_t> mid_singles;  // resize/recolor-noise targets
    std::vector<std::size_t> cluster_subs; // jitter targets (lower cluster box)
};

std::array<std::uint8_t, 3> make_fill(std::mt19937& rng, int lo, int hi) {
    std::uniform_int_distribution<int> base(lo, hi);
    std::uniform_int_distribution<int> chroma(-12, 12);
    const int v = base(rng);
    std::array<std::uint8_t, 3> c;
    for (int ch = 0; ch < 3; ++ch)
        c[ch] = static_cast<std::uint8_t>(std::clamp(v + chroma(rng), 0, 255));
    return c;
}

// Fixed slot grid: 2 columns x 6 rows on an 800x1200 canvas. Slots keep
// enough clearance that blobs of distinct slots never merge at the largest
// dilation extent, while cluster boxes inside one slot always do.
PagePlan make_page(std::uint32_t page_seed) {
    PagePlan plan;
    plan.spec.width = 800;
    plan.spec.height = 1200;
    plan.spec.seed = page_seed;

    std::mt19937 rng(page_seed);
    std::vector<std::pair<int, int>> slots; // slot origin (x, y)
    for (int row = 0; row < 6; ++row)
        for (int col = 0; col < 2; ++col)
            slots.emplace_back(40 + col * 380, 40 + row * 190);
    std::shuffle(slots.begin(), slots.end(), rng);

    std::uniform_int_distribution<int> off(0, 6);
    auto next_slot = [&]() {
        const auto s = slots.back();
        slots.pop_back();
        return std::pair<int, int>{s.first + 10 + off(rng), s.second + 10 + off(rng)};
    };
    auto add = [&](Element e) {
        plan.spec.elements.push_back(e);
        return plan.spec.elements.size() - 1;
    };
    std::uniform_int_distribution<int> u_kind(0, 2);

    // three dark singles, at least one textblock
    for (int i = 0; i < 3; ++i) {
        const auto [sx, sy] = next_slot();
        Element e;
        e.fill = make_fill(rng, 40, 115);
        e.texture_seed = page_seed * 131u + static_cast<std::uint32_t>(i) + 1u;
        const int kind = i == 0 ? 2 : u_kind(rng);
        if (kind == 2) {
            e.kind = ElementKind::TextBlock;
            e.bbox = Box{sx, sy, std::uniform_int_distribution<int>(180, 270)(rng),
                         std::uniform_int_distribution<int>(60, 90)(rng)};
        } else if (kind == 1) {
            e.kind = ElementKind::Bar;
            e.bbox = Box{sx, sy, std::uniform_int_distribution<int>(160, 260)(rng),
                         std::uniform_int_distribution<int>(10, 16)(rng)};
        } else {
            e.kind = ElementKind::Box;
            e.border = true;
            e.bbox = Box{sx, sy, std::uniform_int_distribution<int>(150, 270)(rng),
                         std::uniform_int_distribution<int>(40, 60)(rng)};
        }
        const std::size_t idx = add(e);
        plan.dark_singles.push_back(idx);
        if (e.kind == ElementKind::TextBlock) plan.textblocks.push_back(idx);
    }

    // three mid singles: textblocks, so their windows carry texture
    for (int i = 0; i < 3; ++i) {
        const auto [sx, sy] = next_slot();
        Element e;
        e.kind = ElementKind::TextBlock;
        e.fill = make_fill(rng, 95, 150);
        e.texture_seed = page_seed * 131u + static_cast<std::uint32_t>(i) + 11u;
        e.bbox = Box{sx, sy, std::uniform_int_distribution<int>(160, 240)(rng),
                     std::uniform_int_distribution<int>(60, 90)(rng)};
        plan.mid_singles.push_back(add(e));
    }

    // one cluster: two stacked boxes with a small gap, close enough to
    // segment as a single region; population alternates
    {
        const auto [sx, sy] = next_slot();
        const int w = std::uniform_int_distribution<int>(160, 250)(rng);
        const bool dark = rng() % 2 == 0;
        const int lo = dark ? 40 : 95;
        const int hi = dark ? 115 : 150;
        Element top;
        top.kind = ElementKind::Box;
        top.fill = make_fill(rng, lo, hi);
        top.bbox = Box{sx, sy, w, 55};
        add(top);
        Element bottom;
        bottom.kind = ElementKind::Box;
        bottom.fill = make_fill(rng, lo, hi);
        bottom.bbox = Box{sx, sy + 55 + 6, w, 55};
        plan.cluster_subs.push_back(add(bottom));
    }
    return plan;
}

struct Assignment {
    PerturbationKind kind;
    double magnitude;
};

} // namespace

std::vector<CorpusPair> gen_corpus(int n_pages, std::uint32_t seed, const CorpusMix& mix) {
    if (n_pages < 1)
        throw FormatError("gen_corpus: need at least one page");
    if (mix.total_pages() > 0 && mix.clean > n_pages)
        throw FormatError("gen_corpus: clean count exceeds page count");

    std::mt19937 rng(seed);
    auto uni = [&rng](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    // expand the mix into concrete assignments
    std::vector<Assignment> todo;
    auto push_n = [&todo](int n, PerturbationKind k, double mag) {
        for (int i = 0; i < n; ++i) todo.push_back({k, mag});
    };
    push_n(mix.shift_defects, PerturbationKind::Shift, 0);
    push_n(mix.delete_defects, PerturbationKind::Delete, 0);
    push_n(mix.recolor_defects, PerturbationKind::Recolor, 0);
    push_n(mix.texture_defects, PerturbationKind::TextureSwap, 0);
    push_n(mix.resize_defects, PerturbationKind::Resize, 0);
    push_n(mix.resize_noise, PerturbationKind::Resize, -1);
    push_n(mix.recolor_noise, PerturbationKind::Recolor, -1);
    push_n(mix.jitter_noise, PerturbationKind::SubpixelJitter, 0);
    push_n(mix.antialias_noise, PerturbationKind::AntialiasNoise, 0);
    std::shuffle(todo.begin(), todo.end(), rng);
    std::stable_partition(todo.begin(), todo.end(), [](const Assignment& a) {
        return a.kind == PerturbationKind::AntialiasNoise;
    });

    std::vector<PagePlan> plans;
    plans.reserve(static_cast<std::size_t>(n_pages));
    for (int i = 0; i < n_pages; ++i)
        plans.push_back(make_page(seed * 7919u + static_cast<std::uint32_t>(i) * 104729u + 1u));

    struct PageState {
        std::vector<Perturbation> perturbations;
        bool noise_locked = false; // antialias pages carry nothing else
    };
    std::vector<PageState> state(static_cast<std::size_t>(n_pages));

    const int first_perturbable = std::min(mix.clean, n_pages);
    const int perturbable = n_pages - first_perturbable;
    if (!todo.empty() && perturbable == 0)
        throw FormatError("gen_corpus: mix leaves no page to perturb");

    // simulated browser-platform combination per pair; higher indices render
    // with stronger antialias noise and jitter, the way platforms differ
    std::vector<int> config_of(static_cast<std::size_t>(n_pages));
    for (int i = 0; i < n_pages; ++i)
        config_of[i] = 1 + static_cast<int>((seed + static_cast<std::uint32_t>(i)) % 14u);

    std::size_t cursor = 0;
    for (const Assignment& a : todo) {
        bool placed = false;
        for (int probe = 0; probe < perturbable && !placed; ++probe) {
            const std::size_t pi =
                static_cast<std::size_t>(first_perturbable + (cursor + probe) % perturbable);
            PagePlan& plan = plans[pi];
            PageState& st = state[pi];
            const double volatility = (config_of[pi] - 1) / 13.0;
            if (st.noise_locked) continue;
            if (a.kind == PerturbationKind::AntialiasNoise && !st.perturbations.empty()) continue;

            Perturbation p;
            p.kind = a.kind;
            switch (a.kind) {
                case PerturbationKind::Shift:
                    if (plan.dark_singles.empty()) continue;
                    p.target = plan.dark_singles.back();
                    plan.dark_singles.pop_back();
                    std::erase(plan.textblocks, p.target);
                    p.magnitude = uni(46, 62);
                    break;
                case PerturbationKind::Delete:
                    if (plan.dark_singles.empty()) continue;
                    p.target = plan.dark_singles.back();
                    plan.dark_singles.pop_back();
                    std::erase(plan.textblocks, p.target);
                    break;
                case PerturbationKind::Recolor:
                    if (a.magnitude < 0) { // sub-threshold noise, mid target
                        if (plan.mid_singles.empty()) continue;
                        p.target = plan.mid_singles.back();
                        plan.mid_singles.pop_back();
                        p.magnitude = uni(20, 30);
                    } else { // strong defect: leave only a faint residual
                        if (plan.dark_singles.empty()) continue;
                        p.target = plan.dark_singles.back();
                        plan.dark_singles.pop_back();
                        std::erase(plan.textblocks, p.target);
                        const Element& e = plan.spec.elements[p.target];
                        int max_dist = 0;
                        for (int ch = 0; ch < 3; ++ch)
                            max_dist = std::max(max_dist,
                                                std::abs(static_cast<int>(plan.spec.background[ch]) -
                                                         e.fill[ch]));
                        p.magnitude = std::max(40, max_dist - uni(12, 24));
                    }
                    break;
                case PerturbationKind::TextureSwap:
                    if (plan.textblocks.empty()) continue;
                    p.target = plan.textblocks.back();
                    plan.textblocks.pop_back();
                    std::erase(plan.dark_singles, p.target);
                    break;
                case PerturbationKind::Resize:
                    if (plan.mid_singles.empty()) continue;
                    p.target = plan.mid_singles.back();
                    plan.mid_singles.pop_back();
                    p.magnitude = a.magnitude < 0 ? uni(8, 12) : uni(19, 26);
                    break;
                case PerturbationKind::SubpixelJitter:
                    if (plan.cluster_subs.empty()) continue;
                    p.target = plan.cluster_subs.back();
                    plan.cluster_subs.pop_back();
                    p.magnitude = uni(1, 2 + (volatility > 0.5 ? 1 : 0));
                    break;
                case PerturbationKind::AntialiasNoise:
                    p.magnitude = uni(70, 80) + static_cast<int>(std::lround(45.0 * volatility));
                    st.noise_locked = true;
                    break;
            }
            st.perturbations.push_back(p);
            placed = true;
            cursor = (cursor + probe + 1) % static_cast<std::size_t>(perturbable);
        }
        if (!placed)
            throw FormatError("gen_corpus: mix exceeds corpus capacity");
    }

    // deletions shift element indices: apply per page in descending target
    // order (page-level noise last, it has no target)
    std::vector<CorpusPair> corpus;
    corpus.reserve(static_cast<std::size_t>(n_pages));
    for (int i = 0; i < n_pages; ++i) {
        CorpusPair pair;
        pair.id = i;
        pair.config_index = config_of[i];
        pair.baseline = plans[i].spec;
        PageSpec current = plans[i].spec;
        auto& ps = state[i].perturbations;
        std::sort(ps.begin(), ps.end(), [](const Perturbation& l, const Perturbation& r) {
            const bool ln = l.kind == PerturbationKind::AntialiasNoise;
            const bool rn = r.kind == PerturbationKind::AntialiasNoise;
            if (ln != rn) return rn;
            return l.target > r.target;
        });
        for (const Perturbation& p : ps) {
            PerturbResult r = perturb(current, p);
            current = std::move(r.page);
            pair.oracle.push_back(r.oracle);
        }
        pair.under_test = std::move(current);
        corpus.push_back(std::move(pair));
    }
    return corpus;
}

CorpusMix default_mix(int n_pages) {
    CorpusMix mix;
    const std::array<std::pair<int*, int>, 10> weights = {{
        {&mix.clean, 20},
        {&mix.shift_defects, 13},
        {&mix.delete_defects, 13},
        {&mix.recolor_defects, 13},
        {&mix.texture_defects, 5},
        {&mix.resize_defects, 5},
        {&mix.resize_noise, 11},
        {&mix.recolor_noise, 6},
        {&mix.jitter_noise, 8},
        {&mix.antialias_noise, 6},
    }};
    int assigned = 0;
    for (const auto& [slot, w] : weights) {
        *slot = n_pages * w / 100;
        assigned += *slot;
    }
    mix.clean += n_pages - assigned; // remainder stays unperturbed
    return mix;
}

std::string kind_name(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::Shift: return "shift";
        case PerturbationKind::Resize: return "resize";
        case PerturbationKind::Delete: return "delete";
        case PerturbationKind::Recolor: return "recolor";
        case PerturbationKind::TextureSwap: return "texture-swap";
        case PerturbationKind::SubpixelJitter: return "subpixel-jitter";
        case PerturbationKind::AntialiasNoise: return "antialias-noise";
    }
    return "unknown";
}

PerturbationKind kind_from_name(const std::string& name) {
    if (name == "shift") return PerturbationKind::Shift;
    if (name == "resize") return PerturbationKind::Resize;
    if (name == "delete") return PerturbationKind::Delete;
    if (name == "recolor") return PerturbationKind::Recolor;
    if (name == "texture-swap") return PerturbationKind::TextureSwap;
    if (name == "subpixel-jitter") return PerturbationKind::SubpixelJitter;
    if (name == "antialias-noise") return PerturbationKind::AntialiasNoise;
    throw FormatError("unknown perturbation kind: " + name);
}

int severity_class(PerturbationKind k, OracleLabel label) {
    switch (k) {
        case PerturbationKind::AntialiasNoise:
        case PerturbationKind::SubpixelJitter:
            return 0; // C1
        case PerturbationKind::Resize:
            return label == OracleLabel::Incompatibility ? 2 : 1;
        case PerturbationKind::Recolor:
            return label == OracleLabel::Incompatibility ? 3 : 1;
        case PerturbationKind::Shift:
            return label == OracleLabel::Incompatibility ? 2 : 1;
        case PerturbationKind::TextureSwap:
            return 2; // C3
        case PerturbationKind::Delete:
            return 3; // C4
    }
    return 0;
}

} // namespace roidiff::synth
