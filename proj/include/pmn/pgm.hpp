#pragma once

#include <vector>

#include "pmn/encoder.hpp"
#include "pmn/numerics.hpp"
#include "pmn/slic.hpp"

namespace pmn {

/// One row per surviving superpixel mask, in MaskStack order.
struct PrototypeSet {
    Tensor vectors;  // N' x C
    Stream origin = Stream::rgb;
    std::vector<std::int32_t> superpixels;

    std::size_t count() const { return vectors.empty() ? 0 : vectors.dim(0); }
    std::size_t width() const { return vectors.empty() ? 0 : vectors.dim(1); }
};

/// 1x1 projections of the three pyramid levels to the common width C.
struct PgmWeights {
    LinearParams level1;
    LinearParams level2;
    LinearParams level3;

    const LinearParams& level(std::size_t r) const { return r == 0 ? level1 : (r == 1 ? level2 : level3); }
    std::size_t width() const { return level1.out_features(); }
};

/// Project each level to C channels, bring e1 (H/4) down and e3 (H/16) up to
/// H/8 bilinearly, and sum.
Tensor fuse_pyramid(const FeaturePyramid& pyramid, const PgmWeights& weights);

/// Masked average pooling of E over every mask of the stack.
PrototypeSet generate_prototypes(const Tensor& fused, const MaskStack& masks);

}  // namespace pmn
