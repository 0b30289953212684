#include "pmn/cmgm.hpp"

#include <cmath>

#include "pmn/errors.hpp"

namespace pmn {

ProjectedFeatures project_features(const FeaturePyramid& pyramid, const CmgmWeights& weights) {
    ProjectedFeatures out;
    for (std::size_t r = 0; r < 3; ++r) {
        const LinearParams& p = weights.level(r);
        p.validate();
        if (p.in_features() != pyramid.channels(r) || p.out_features() != weights.width()) {
            throw ConfigError("project_features: level " + std::to_string(r + 1) + " weight " +
                              shape_string(p.weight.shape()) + " does not fit " +
                              std::to_string(pyramid.channels(r)) + " input channels");
        }
        out[r] = linear_map_pixels(pyramid.level(r), p);
    }
    return out;
}

CorrelationMaps correlation_maps(const ProjectedFeatures& features, const MemoryBank& bank, std::size_t channels) {
    if (bank.empty()) throw ParameterError("correlation_maps: memory bank is empty");
    if (channels == 0) throw ParameterError("correlation_maps: channel budget must be positive");
    const std::size_t c = features[0].dim(0);
    if (bank.width() != c) {
        throw ConfigError("correlation_maps: prototypes of width " + std::to_string(bank.width()) +
                          " against features of width " + std::to_string(c));
    }
    const std::size_t used = std::min(channels, bank.size());
    std::vector<Real> proto_norm(used);
    for (std::size_t n = 0; n < used; ++n) {
        Real s = 0.0;
        for (Real v : bank.slots()[n].vector) s += v * v;
        proto_norm[n] = std::sqrt(s);
    }

    CorrelationMaps out;
    std::vector<Real> pixel(c);
    for (std::size_t r = 0; r < 3; ++r) {
        const Tensor& f = features[r];
        if (f.rank() != 3 || f.dim(0) != c) {
            throw DimensionError("correlation_maps: level " + std::to_string(r + 1) + " has shape " +
                                 shape_string(f.shape()));
        }
        const std::size_t h = f.dim(1), w = f.dim(2), plane = h * w;
        Tensor tau = Tensor::volume(channels, h, w);
        for (std::size_t i = 0; i < plane; ++i) {
            Real pn = 0.0;
            for (std::size_t ch = 0; ch < c; ++ch) {
                pixel[ch] = f[ch * plane + i];
                pn += pixel[ch] * pixel[ch];
            }
            pn = std::sqrt(pn);
            if (pn < kCosineNormFloor) continue;
            for (std::size_t n = 0; n < used; ++n) {
                if (proto_norm[n] < kCosineNormFloor) continue;
                const auto& p = bank.slots()[n].vector;
                Real dot = 0.0;
                for (std::size_t ch = 0; ch < c; ++ch) dot += pixel[ch] * p[ch];
                tau[n * plane + i] = std::clamp(dot / (pn * proto_norm[n]), -1.0, 1.0);
            }
        }
        out.levels[r] = std::move(tau);
    }
    return out;
}

}  // namespace pmn
