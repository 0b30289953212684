#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "pmn/cmgm.hpp"
#include "pmn/config.hpp"
#include "pmn/decoder.hpp"
#include "pmn/pgm.hpp"
#include "pmn/psm.hpp"
#include "pmn/tensor_file.hpp"

namespace pmn {

/// Weights of one stream: fusion, scorer (whichever the config selects) and
/// correlation projections.
struct StreamWeights {
    PgmWeights pgm;
    std::optional<PsmWeights> transformer;
    std::optional<MlpScorerWeights> mlp_scorer;
    CmgmWeights cmgm;
};

/// Full model. When `flow` is absent the flow stream shares the RGB bundle.
struct ModelWeights {
    StreamWeights rgb;
    std::optional<StreamWeights> flow;
    DecoderWeights decoder;

    const StreamWeights& stream(Stream s) const { return (s == Stream::flow && flow) ? *flow : rgb; }
    bool tied() const { return !flow.has_value(); }
};

/// Seeded Glorot-uniform initialization, a = sqrt(6 / (fan_in + fan_out)) per
/// linear map or convolution; zero biases; unit layer-norm scales.
ModelWeights init_weights(const PipelineConfig& config, std::uint64_t seed);

/// Visits every trainable tensor under a stable dotted name, in a fixed order.
void visit_parameters(ModelWeights& weights, const std::function<void(const std::string&, Tensor&)>& fn);
void visit_parameters(const ModelWeights& weights,
                      const std::function<void(const std::string&, const Tensor&)>& fn);

std::size_t parameter_count(const ModelWeights& weights);

/// Container form: all parameters plus a `meta.heads` scalar.
TensorFile weights_to_tensors(const ModelWeights& weights);
ModelWeights weights_from_tensors(const TensorFile& file);

/// Checks every bundle against the config's widths and channel budget.
void check_weights(const ModelWeights& weights, const PipelineConfig& config);

}  // namespace pmn
