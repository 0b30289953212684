#include "pmn/pgm.hpp"

#include "pmn/errors.hpp"

namespace pmn {

Tensor fuse_pyramid(const FeaturePyramid& pyramid, const PgmWeights& weights) {
    const std::size_t c = weights.width();
    for (std::size_t r = 0; r < 3; ++r) {
        const LinearParams& p = weights.level(r);
        p.validate();
        if (p.in_features() != pyramid.channels(r) || p.out_features() != c) {
            throw ConfigError("fuse_pyramid: level " + std::to_string(r + 1) + " weight " +
                              shape_string(p.weight.shape()) + " does not map " +
                              std::to_string(pyramid.channels(r)) + " channels to " + std::to_string(c));
        }
    }
    const std::size_t h = pyramid.e2.dim(1), w = pyramid.e2.dim(2);
    Tensor fused = linear_map_pixels(pyramid.e2, weights.level2);
    const Tensor down = bilinear_resize(linear_map_pixels(pyramid.e1, weights.level1), h, w);
    const Tensor up = bilinear_resize(linear_map_pixels(pyramid.e3, weights.level3), h, w);
    for (std::size_t i = 0; i < fused.size(); ++i) fused[i] += down[i] + up[i];
    return fused;
}

PrototypeSet generate_prototypes(const Tensor& fused, const MaskStack& masks) {
    if (fused.rank() != 3 || fused.dim(1) != masks.height || fused.dim(2) != masks.width) {
        throw DimensionError("generate_prototypes: features " + shape_string(fused.shape()) + " vs masks " +
                             std::to_string(masks.height) + "x" + std::to_string(masks.width));
    }
    const std::size_t c = fused.dim(0), n = masks.size(), cells = masks.cells.size();
    if (n == 0) throw InvariantError("generate_prototypes: mask stack is empty");

    std::vector<std::size_t> area(n, 0);
    for (std::int32_t k : masks.cells) ++area[static_cast<std::size_t>(k)];
    for (std::size_t k = 0; k < n; ++k) {
        if (area[k] == 0) {
            throw InvariantError("generate_prototypes: mask " + std::to_string(k) + " (superpixel " +
                                 std::to_string(masks.indices[k]) + ") is empty");
        }
    }

    PrototypeSet out{Tensor::matrix(n, c), masks.source, masks.indices};
    for (std::size_t ch = 0; ch < c; ++ch) {
        const auto plane = fused.plane(ch);
        for (std::size_t i = 0; i < cells; ++i) out.vectors(static_cast<std::size_t>(masks.cells[i]), ch) += plane[i];
    }
    for (std::size_t k = 0; k < n; ++k) {
        const Real inv = 1.0 / static_cast<Real>(area[k]);
        for (Real& v : out.vectors.row(k)) v *= inv;
    }
    return out;
}

}  // namespace pmn
