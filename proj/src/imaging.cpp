#include "roidiff/imaging.hpp"

#include <algorithm>
#include <cmath>

namespace roidiff::imaging {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// 3x3 derivative at (x, y) with replicate border; integer-exact so that a
// constant intensity offset cancels.
struct Grad3x3 {
    int kx[3][3];
    int ky[3][3];
};

Grad3x3 make_kernel(GradientKernel which) {
    Grad3x3 g{};
    if (which == GradientKernel::Sobel) {
        const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                g.kx[i][j] = kx[i][j];
                g.ky[i][j] = kx[j][i];
            }
    } else {
        const int kx[3][3] = {{-3, 0, 3}, {-10, 0, 10}, {-3, 0, 3}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                g.kx[i][j] = kx[i][j];
                g.ky[i][j] = kx[j][i];
            }
    }
    return g;
}

// Separable gaussian convolution with replicate border.
std::vector<double> gaussian_blur(const std::vector<double>& src, int w, int h, double sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * r + 1));
    double sum = 0.0;
    for (int d = -r; d <= r; ++d) {
        kernel[d + r] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        sum += kernel[d + r];
    }
    for (double& v : kernel) v /= sum;

    std::vector<double> horiz(src.size());
    for (int y = 0; y < h; ++y) {
        const double* srow = src.data() + static_cast<std::size_t>(y) * w;
        double* drow = horiz.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            if (x >= r && x + r < w) {
                for (int d = -r; d <= r; ++d) acc += kernel[d + r] * srow[x + d];
            } else {
                for (int d = -r; d <= r; ++d) acc += kernel[d + r] * srow[clampi(x + d, 0, w - 1)];
            }
            drow[x] = acc;
        }
    }

    std::vector<double> out(src.size());
    for (int y = 0; y < h; ++y) {
        double* drow = out.data() + static_cast<std::size_t>(y) * w;
        const bool interior = y >= r && y + r < h;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            if (interior) {
                for (int d = -r; d <= r; ++d)
                    acc += kernel[d + r] * horiz[static_cast<std::size_t>(y + d) * w + x];
            } else {
                for (int d = -r; d <= r; ++d)
                    acc += kernel[d + r] * horiz[static_cast<std::size_t>(clampi(y + d, 0, h - 1)) * w + x];
            }
            drow[x] = acc;
        }
    }
    return out;
}

} // namespace

Raster to_grayscale(const Raster& image) {
    if (image.channels() == 1) return image;
    if (image.channels() != 3 && image.channels() != 4)
        throw FormatError("to_grayscale: expected 1, 3 or 4 channels");
    Raster out(image.width(), image.height(), 1);
    const int ch = image.channels();
    for (int y = 0; y < image.height(); ++y) {
        const std::uint8_t* src = image.row(y);
        std::uint8_t* dst = out.row(y);
        for (int x = 0; x < image.width(); ++x) {
            const std::uint8_t* p = src + static_cast<std::size_t>(x) * ch;
            // Rec.601 luma, integer rounding
            const unsigned v = (299u * p[0] + 587u * p[1] + 114u * p[2] + 500u) / 1000u;
            dst[x] = static_cast<std::uint8_t>(v);
        }
    }
    return out;
}

BinaryMask harris_corners(const Raster& gray, const HarrisParams& params) {
    if (gray.channels() != 1)
        throw FormatError("harris_corners: expected single-channel input");
    const int w = gray.width();
    const int h = gray.height();
    const Grad3x3 g = make_kernel(params.kernel);

    // Structure tensor entries Ix^2, Iy^2, Ix*Iy
    std::vector<double> a(static_cast<std::size_t>(w) * h);
    std::vector<double> b(a.size());
    std::vector<double> c(a.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            long long gx = 0, gy = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                const int sy = clampi(y + dy, 0, h - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    const int sx = clampi(x + dx, 0, w - 1);
                    const int v = gray.at(sx, sy);
                    gx += static_cast<long long>(g.kx[dy + 1][dx + 1]) * v;
                    gy += static_cast<long long>(g.ky[dy + 1][dx + 1]) * v;
                }
            }
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            a[i] = static_cast<double>(gx) * gx;
            b[i] = static_cast<double>(gy) * gy;
            c[i] = static_cast<double>(gx) * gy;
        }
    }

    a = gaussian_blur(a, w, h, params.window_sigma);
    b = gaussian_blur(b, w, h, params.window_sigma);
    c = gaussian_blur(c, w, h, params.window_sigma);

    // R = det(M) - k * trace(M)^2
    std::vector<double> resp(a.size());
    double max_resp = 0.0;
    for (std::size_t i = 0; i < resp.size(); ++i) {
        const double det = a[i] * b[i] - c[i] * c[i];
        const double tr = a[i] + b[i];
        resp[i] = det - params.k * tr * tr;
        max_resp = std::max(max_resp, resp[i]);
    }

    BinaryMask mask(w, h);
    if (max_resp <= 0.0) return mask; // flat image: no corners

    const double thr = params.rel_threshold * max_resp;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double r = resp[static_cast<std::size_t>(y) * w + x];
            if (r <= thr) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                const int ny = y + dy;
                if (ny < 0 || ny >= h) continue;
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    if (nx < 0 || nx >= w || (dx == 0 && dy == 0)) continue;
                    if (resp[static_cast<std::size_t>(ny) * w + nx] > r) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) mask.set(x, y);
        }
    }
    return mask;
}

BinaryMask dilate_hv(const BinaryMask& mask, int h_extent, int v_extent) {
    if (h_extent < 0 || v_extent < 0)
        throw FormatError("dilate_hv: extents must be non-negative");
    const int w = mask.width();
    const int h = mask.height();

    BinaryMask horiz(w, h);
    if (h_extent == 0) {
        horiz = mask;
    } else {
        for (int y = 0; y < h; ++y) {
            // sliding count of set pixels in [x - e, x + e]
            int cnt = 0;
            for (int x = 0; x <= std::min(h_extent, w - 1); ++x) cnt += mask.get(x, y);
            for (int x = 0; x < w; ++x) {
                if (cnt > 0) horiz.set(x, y);
                const int add = x + h_extent + 1;
                const int del = x - h_extent;
                if (add < w) cnt += mask.get(add, y);
                if (del >= 0) cnt -= mask.get(del, y);
            }
        }
    }

    if (v_extent == 0) return horiz;
    BinaryMask out(w, h);
    for (int x = 0; x < w; ++x) {
        int cnt = 0;
        for (int y = 0; y <= std::min(v_extent, h - 1); ++y) cnt += horiz.get(x, y);
        for (int y = 0; y < h; ++y) {
            if (cnt > 0) out.set(x, y);
            const int add = y + v_extent + 1;
            const int del = y - v_extent;
            if (add < h) cnt += horiz.get(x, add);
            if (del >= 0) cnt -= horiz.get(x, del);
        }
    }
    return out;
}

std::vector<Blob> connected_components(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<Blob> blobs;
    if (mask.empty()) return blobs;

    std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
    std::vector<std::pair<int, int>> stack;

    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            const std::size_t i0 = static_cast<std::size_t>(y0) * w + x0;
            if (!mask.get(x0, y0) || visited[i0]) continue;

            Blob blob;
            int minx = x0, maxx = x0, miny = y0, maxy = y0;
            visited[i0] = 1;
            stack.clear();
            stack.emplace_back(x0, y0);
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                ++blob.pixel_count;
                minx = std::min(minx, x);
                maxx = std::max(maxx, x);
                miny = std::min(miny, y);
                maxy = std::max(maxy, y);
                for (int dy = -1; dy <= 1; ++dy) {
                    const int ny = y + dy;
                    if (ny < 0 || ny >= h) continue;
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx;
                        if (nx < 0 || nx >= w || (dx == 0 && dy == 0)) continue;
                        const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                        if (mask.get(nx, ny) && !visited[ni]) {
                            visited[ni] = 1;
                            stack.emplace_back(nx, ny);
                        }
                    }
                }
            }
            blob.bbox = Box{minx, miny, maxx - minx + 1, maxy - miny + 1};
            blobs.push_back(blob);
        }
    }

    std::sort(blobs.begin(), blobs.end(), [](const Blob& l, const Blob& r) {
        return std::tie(l.bbox.y, l.bbox.x, l.bbox.height, l.bbox.width) <
               std::tie(r.bbox.y, r.bbox.x, r.bbox.height, r.bbox.width);
    });
    return blobs;
}

std::array<std::uint64_t, 10> histogram10_counts(const Raster& gray_window) {
    if (gray_window.channels() != 1)
        throw FormatError("histogram10: expected single-channel window");
    if (gray_window.empty())
        throw EmptyRoiError("histogram10: empty window");
    std::array<std::uint64_t, 10> bins{};
    for (int y = 0; y < gray_window.height(); ++y) {
        const std::uint8_t* row = gray_window.row(y);
        for (int x = 0; x < gray_window.width(); ++x)
            ++bins[std::min(9u, row[x] * 10u / 256u)];
    }
    return bins;
}

std::array<double, 10> histogram10(const Raster& gray_window) {
    const auto counts = histogram10_counts(gray_window);
    const double total = static_cast<double>(gray_window.pixel_count());
    std::array<double, 10> bins{};
    for (int i = 0; i < 10; ++i) bins[i] = static_cast<double>(counts[i]) / total;
    return bins;
}

std::uint64_t ssd(const Raster& templ, const Raster& search, int x, int y) {
    if (templ.channels() != 1 || search.channels() != 1)
        throw FormatError("ssd: expected single-channel rasters");
    if (x < 0 || y < 0 || x + templ.width() > search.width() || y + templ.height() > search.height())
        throw PlacementOutOfBoundsError("ssd: template placement outside search image");
    std::uint64_t acc = 0;
    for (int ty = 0; ty < templ.height(); ++ty) {
        const std::uint8_t* trow = templ.row(ty);
        const std::uint8_t* srow = search.row(y + ty) + x;
        for (int tx = 0; tx < templ.width(); ++tx) {
            const int d = static_cast<int>(srow[tx]) - static_cast<int>(trow[tx]);
            acc += static_cast<std::uint64_t>(d * d);
        }
    }
    return acc;
}

} // namespace roidiff::imaging
