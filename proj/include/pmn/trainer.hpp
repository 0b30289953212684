#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pmn/pipeline.hpp"

namespace pmn {

struct ParamSlice {
    std::string name;
    std::size_t offset = 0;
    Shape shape;
};

/// All trainable tensors of a model laid end to end, in visit_parameters order.
struct ParamVector {
    std::vector<Real> values;
    std::vector<ParamSlice> manifest;

    std::size_t size() const { return values.size(); }
};

ParamVector flatten(const ModelWeights& weights);

/// Writes the values back into `weights`, whose layout must match the manifest.
void unflatten(const ParamVector& params, ModelWeights& weights);

/// Per-coordinate step h_i = max(floor, relative * |theta_i|).
struct FdOptions {
    Real relative = 1e-3;
    Real floor = 1e-4;
    // coordinates are split across this many threads; results do not depend on it
    std::size_t threads = 1;

    Real step(Real theta) const;
};

using LossFunction = std::function<Real(const std::vector<Real>& theta)>;

/// Central differences (L(theta + h e_i) - L(theta - h e_i)) / 2h. The loss must
/// be safe to call concurrently when threads > 1.
std::vector<Real> fd_gradient(const LossFunction& loss, const std::vector<Real>& theta,
                              const FdOptions& options = {});

/// One-sided variant (L(theta + h e_i) - L(theta)) / h, used to cross-check.
std::vector<Real> fd_gradient_forward(const LossFunction& loss, const std::vector<Real>& theta,
                                      const FdOptions& options = {});

struct TrainOptions {
    std::size_t steps = 200;
    Real learning_rate = 0.3;
    FdOptions fd;
    // gradient L2 norm cap; 0 disables clipping
    Real clip = 0.0;
};

struct TrainResult {
    ModelWeights weights;
    // trace[i] is the mean sequence loss before step i; trace[steps] after the last step
    std::vector<Real> trace;
};

/// Plain gradient descent on sequence_loss. Memory banks start empty on every
/// loss evaluation.
TrainResult train_toy(const std::vector<PreparedFrame>& frames, const ModelWeights& initial,
                      const PipelineConfig& config, const TrainOptions& options);

}  // namespace pmn
