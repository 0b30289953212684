#pragma once

#include <array>

#include "pmn/encoder.hpp"
#include "pmn/psm.hpp"

namespace pmn {

/// Per-level 1x1 projections of the encoder pyramid (E'_1..E'_3).
struct CmgmWeights {
    LinearParams level1;
    LinearParams level2;
    LinearParams level3;

    const LinearParams& level(std::size_t r) const { return r == 0 ? level1 : (r == 1 ? level2 : level3); }
    std::size_t width() const { return level1.out_features(); }
};

using ProjectedFeatures = std::array<Tensor, 3>;

/// tau_r: K x h_r x w_r cosine maps, one channel per memory slot in bank
/// order; channels past the bank size are zero.
struct CorrelationMaps {
    std::array<Tensor, 3> levels;

    std::size_t channels() const { return levels[0].dim(0); }
};

ProjectedFeatures project_features(const FeaturePyramid& pyramid, const CmgmWeights& weights);

/// Uses the first min(bank size, channels) slots of `bank`.
CorrelationMaps correlation_maps(const ProjectedFeatures& features, const MemoryBank& bank, std::size_t channels);

}  // namespace pmn
