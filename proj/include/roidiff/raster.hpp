/**
 * @file raster.hpp
 * @brief Pixel containers: 8-bit raster images and 1-bit masks.
 *
 * Coordinate convention throughout the library: origin at the top-left
 * corner, x grows rightward, y grows downward, integer pixel coordinates.
 */
#ifndef ROIDIFF_RASTER_HPP
#define ROIDIFF_RASTER_HPP

#include <cstdint>
#include <vector>

#include "roidiff/errors.hpp"

namespace roidiff {

/// Axis-aligned rectangle in pixel coordinates.
struct Box {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    int right() const { return x + width; }    // one past the last column
    int bottom() const { return y + height; }  // one past the last row

    bool contains(int px, int py) const {
        return px >= x && px < right() && py >= y && py < bottom();
    }
    bool intersects(const Box& o) const {
        return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
    }
    friend bool operator==(const Box&, const Box&) = default;
};

/// Row-major 8-bit image, 1 (gray), 3 (RGB) or 4 (RGBA) channels.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels, std::uint8_t fill = 0)
        : width_(width), height_(height), channels_(channels),
          data_(static_cast<std::size_t>(width) * height * channels, fill) {
        if (width < 1 || height < 1 || (channels != 1 && channels != 3 && channels != 4))
            throw FormatError("Raster: invalid dimensions or channel count");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

    std::uint8_t* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_ * channels_; }
    const std::uint8_t* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_ * channels_; }

    std::uint8_t& at(int x, int y, int c = 0) { return row(y)[static_cast<std::size_t>(x) * channels_ + c]; }
    std::uint8_t at(int x, int y, int c = 0) const { return row(y)[static_cast<std::size_t>(x) * channels_ + c]; }

    std::vector<std::uint8_t>& data() { return data_; }
    const std::vector<std::uint8_t>& data() const { return data_; }

    /// Copy of the sub-rectangle; the box must lie inside the image.
    Raster crop(const Box& b) const {
        if (b.x < 0 || b.y < 0 || b.right() > width_ || b.bottom() > height_ || b.width < 1 || b.height < 1)
            throw FormatError("Raster::crop: box outside image");
        Raster out(b.width, b.height, channels_);
        for (int y = 0; y < b.height; ++y) {
            const std::uint8_t* src = row(b.y + y) + static_cast<std::size_t>(b.x) * channels_;
            std::uint8_t* dst = out.row(y);
            std::copy(src, src + static_cast<std::size_t>(b.width) * channels_, dst);
        }
        return out;
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Binary image, one byte per pixel holding 0 or 1.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height)
        : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0) {
        if (width < 1 || height < 1)
            throw FormatError("BinaryMask: invalid dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return bits_.empty(); }

    std::uint8_t get(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x]; }
    void set(int x, int y, std::uint8_t v = 1) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint8_t b : bits_) n += b;
        return n;
    }

    std::vector<std::uint8_t>& bits() { return bits_; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

} // namespace roidiff

#endif
