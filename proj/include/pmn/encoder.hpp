#pragma once

#include <filesystem>
#include <functional>

#include "pmn/image.hpp"
#include "pmn/stream.hpp"
#include "pmn/tensor.hpp"

namespace pmn {

enum class FeatureSource { handcrafted, file, external };

/// Three-level encoder output: e1 at H/4, e2 at H/8, e3 at H/16.
struct FeaturePyramid {
    Tensor e1;
    Tensor e2;
    Tensor e3;
    FeatureSource source = FeatureSource::external;

    const Tensor& level(std::size_t r) const;
    std::size_t channels(std::size_t r) const { return level(r).dim(0); }
    std::size_t image_height() const { return e1.dim(1) * 4; }
    std::size_t image_width() const { return e1.dim(2) * 4; }

    /// Shapes follow the /4, /8, /16 contract and all values are finite.
    void validate() const;
};

struct EncoderChannels {
    std::size_t c1 = 16;
    std::size_t c2 = 16;
    std::size_t c3 = 16;
};

/// Number of distinct handcrafted base channels (L, a, b, |Gx|, |Gy|, local variance).
inline constexpr std::size_t kHandcraftedBase = 6;

/// Deterministic pyramid from pooled CIELAB, Sobel magnitudes and local variance
/// of lightness, tiled to the requested channel counts. H and W must be
/// multiples of 16.
FeaturePyramid handcrafted_features(const Image& image, const EncoderChannels& channels = {});

/// Any source of pyramids. `frame` is the frame index inside the sequence.
using FeatureExtractor = std::function<FeaturePyramid(const Image& image, Stream stream, std::size_t frame)>;

FeatureExtractor handcrafted_extractor(EncoderChannels channels);

void save_features(const std::filesystem::path& path, const FeaturePyramid& pyramid);
FeaturePyramid load_features(const std::filesystem::path& path);

}  // namespace pmn
