#pragma once

#include <cstdint>
#include <vector>

#include "pmn/image.hpp"
#include "pmn/stream.hpp"

namespace pmn {

/// Integer label grid. Labels are compact: every value in [0, count) occurs.
struct SuperpixelMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t count = 0;
    std::vector<std::int32_t> labels;

    std::int32_t at(std::size_t y, std::size_t x) const { return labels[y * width + x]; }

    friend bool operator==(const SuperpixelMap&, const SuperpixelMap&) = default;
};

/// Per-superpixel binary masks at feature resolution, stored as a cell ->
/// mask-position map. Masks that vanished under downsampling are absent;
/// `indices[k]` is the original label of mask k.
struct MaskStack {
    std::size_t height = 0;
    std::size_t width = 0;
    Stream source = Stream::rgb;
    std::vector<std::int32_t> cells;
    std::vector<std::int32_t> indices;

    std::size_t size() const noexcept { return indices.size(); }
    BinaryMask mask(std::size_t k) const;
    std::size_t area(std::size_t k) const;
};

struct SlicOptions {
    std::size_t n_segments = 100;
    Real compactness = 10.0;
    int iterations = 10;
    // Centers start on a deterministic grid; the seed does not influence the result.
    std::uint64_t seed = 0;
    // Row bands for the assignment step. Any value gives bit-identical labels.
    std::size_t threads = 1;
};

/// Optional instrumentation: k-means objective (sum of squared SLIC
/// distances) after each assignment step.
struct SlicTrace {
    std::vector<Real> costs;
};

SuperpixelMap slic_segment(const Image& image, const SlicOptions& options, SlicTrace* trace = nullptr);

/// Rectangular tiling: rows = floor(sqrt N), cols = ceil(N / rows), the last
/// row holding the remaining N - (rows - 1) * cols tiles. Earlier tiles take
/// the ceil share of a floor/ceil split.
SuperpixelMap grid_masks(std::size_t height, std::size_t width, std::size_t n_segments);

/// Voronoi partition around N distinct uniformly drawn seed pixels.
SuperpixelMap random_masks(std::size_t height, std::size_t width, std::size_t n_segments, std::uint64_t seed);

/// Majority-vote label downsampling (ties -> smaller label), then one mask per
/// surviving label.
MaskStack downsample_masks(const SuperpixelMap& map, std::size_t height, std::size_t width,
                           Stream source = Stream::rgb);

/// Every pixel labelled in [0, count) and every such label used.
bool is_compact_partition(const SuperpixelMap& map);

/// True when every label's pixel set is a single 4-connected component.
bool labels_are_connected(const SuperpixelMap& map);

/// Color overlay: label boundaries painted over the image.
Image overlay_boundaries(const Image& image, const SuperpixelMap& map, const std::array<Real, 3>& color = {1, 0, 0});

}  // namespace pmn
