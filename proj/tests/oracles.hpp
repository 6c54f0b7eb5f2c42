// Independent brute-force reference implementations used to check the
// library. Everything here is written as plainly as possible: naive loops,
// no shared code with the implementations under test.
#ifndef ROIDIFF_TESTS_ORACLES_HPP
#define ROIDIFF_TESTS_ORACLES_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "roidiff/raster.hpp"

namespace oracles {

using roidiff::BinaryMask;
using roidiff::Raster;

// --- raw moments ------------------------------------------------------------

struct Moments {
    std::int64_t m00 = 0, m10 = 0, m01 = 0, m11 = 0, m20 = 0, m02 = 0;
};

inline Moments moments_bruteforce(const Raster& w) {
    Moments m;
    for (int y = 0; y < w.height(); ++y)
        for (int x = 0; x < w.width(); ++x) {
            const std::int64_t v = w.at(x, y);
            m.m00 += v;
            m.m10 += v * x;
            m.m01 += v * y;
            m.m11 += v * x * y;
            m.m20 += v * x * x;
            m.m02 += v * y * y;
        }
    return m;
}

// --- SSD --------------------------------------------------------------------

inline std::uint64_t ssd_bruteforce(const Raster& templ, const Raster& search, int x, int y) {
    std::uint64_t acc = 0;
    for (int j = 0; j < templ.height(); ++j)
        for (int i = 0; i < templ.width(); ++i) {
            const std::int64_t d = static_cast<int>(search.at(x + i, y + j)) -
                                   static_cast<int>(templ.at(i, j));
            acc += static_cast<std::uint64_t>(d * d);
        }
    return acc;
}

struct ScanResult {
    std::uint64_t best = ~0ull;
    int x = 0, y = 0;
};

// exhaustive scan over a rectangle of placements, first minimum wins
inline ScanResult ssd_scan_bruteforce(const Raster& templ, const Raster& search,
                                      int x0, int y0, int x1, int y1) {
    ScanResult r;
    for (int y = y0; y + templ.height() <= y1; ++y)
        for (int x = x0; x + templ.width() <= x1; ++x) {
            const std::uint64_t v = ssd_bruteforce(templ, search, x, y);
            if (v < r.best) {
                r.best = v;
                r.x = x;
                r.y = y;
            }
        }
    return r;
}

// --- dilation ---------------------------------------------------------------

inline BinaryMask dilate_bruteforce(const BinaryMask& in, int he, int ve) {
    BinaryMask out(in.width(), in.height());
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x) {
            if (!in.get(x, y)) continue;
            for (int dy = -ve; dy <= ve; ++dy)
                for (int dx = -he; dx <= he; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx >= 0 && nx < in.width() && ny >= 0 && ny < in.height())
                        out.set(nx, ny);
                }
        }
    return out;
}

// --- Harris structure-tensor response, evaluated per pixel -------------------

inline double harris_response_at(const Raster& gray, int px, int py, double sigma, double k) {
    const int w = gray.width();
    const int h = gray.height();
    auto pix = [&](int x, int y) {
        x = std::min(std::max(x, 0), w - 1);
        y = std::min(std::max(y, 0), h - 1);
        return static_cast<double>(gray.at(x, y));
    };
    auto sobel = [&](int x, int y, bool horizontal) {
        if (horizontal)
            return -pix(x - 1, y - 1) + pix(x + 1, y - 1) - 2 * pix(x - 1, y) + 2 * pix(x + 1, y) -
                   pix(x - 1, y + 1) + pix(x + 1, y + 1);
        return -pix(x - 1, y - 1) - 2 * pix(x, y - 1) - pix(x + 1, y - 1) + pix(x - 1, y + 1) +
               2 * pix(x, y + 1) + pix(x + 1, y + 1);
    };

    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    double wsum = 0.0, a = 0.0, b = 0.0, c = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            wsum += std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double weight = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) / wsum;
            const int sx = std::min(std::max(px + dx, 0), w - 1);
            const int sy = std::min(std::max(py + dy, 0), h - 1);
            const double gx = sobel(sx, sy, true);
            const double gy = sobel(sx, sy, false);
            a += weight * gx * gx;
            b += weight * gy * gy;
            c += weight * gx * gy;
        }
    return (a * b - c * c) - k * (a + b) * (a + b);
}

// --- random images ----------------------------------------------------------

inline Raster random_gray(std::mt19937& rng, int w, int h, int lo = 0, int hi = 255) {
    Raster img(w, h, 1);
    std::uniform_int_distribution<int> d(lo, hi);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = static_cast<std::uint8_t>(d(rng));
    return img;
}

inline BinaryMask random_mask(std::mt19937& rng, int w, int h, double density) {
    BinaryMask m(w, h);
    std::bernoulli_distribution d(density);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (d(rng)) m.set(x, y);
    return m;
}

} // namespace oracles

#endif
