#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "pmn/tensor.hpp"

namespace pmn {

/// Interleaved H x W x 3 image with channels in [0, 1].
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<Real> pixels;

    Image() = default;
    Image(std::size_t h, std::size_t w, Real fill = 0.0) : height(h), width(w), pixels(h * w * 3, fill) {}

    Real& at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * 3 + c]; }
    Real at(std::size_t y, std::size_t x, std::size_t c) const { return pixels[(y * width + x) * 3 + c]; }

    void set(std::size_t y, std::size_t x, const std::array<Real, 3>& rgb) {
        for (std::size_t c = 0; c < 3; ++c) at(y, x, c) = rgb[c];
    }

    bool empty() const noexcept { return height == 0 || width == 0; }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Binary H x W mask (0/1 bytes).
struct BinaryMask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(std::size_t h, std::size_t w) : height(h), width(w), bits(h * w, 0) {}

    std::uint8_t& at(std::size_t y, std::size_t x) { return bits[y * width + x]; }
    std::uint8_t at(std::size_t y, std::size_t x) const { return bits[y * width + x]; }
    std::size_t count() const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// Soft H x W mask with values in [0, 1].
struct SegMask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<Real> values;

    /// pixel >= threshold -> 1
    BinaryMask binarize(Real threshold = 0.5) const;

    friend bool operator==(const SegMask&, const SegMask&) = default;
};

SegMask to_soft(const BinaryMask& mask);

// Binary PNM I/O. Malformed files raise FormatError.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// 8- or 16-bit P5 read as values scaled to [0, 1].
std::vector<Real> read_pgm(const std::filesystem::path& path, std::size_t& height, std::size_t& width);

/// Mask file: any nonzero gray level counts as foreground.
BinaryMask read_mask_pgm(const std::filesystem::path& path);

/// Soft mask as 8-bit P5 (value x 255, rounded).
void write_mask_pgm(const std::filesystem::path& path, const SegMask& mask);
void write_mask_pgm(const std::filesystem::path& path, const BinaryMask& mask);

/// 16-bit P5 with raw integer levels (big-endian samples, maxval 65535).
void write_pgm16(const std::filesystem::path& path, std::size_t height, std::size_t width,
                 const std::vector<std::uint16_t>& levels);
std::vector<std::uint16_t> read_pgm16_levels(const std::filesystem::path& path, std::size_t& height,
                                             std::size_t& width);

}  // namespace pmn
