#include "pmn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "pmn/errors.hpp"

namespace pmn {

namespace {

enum class Scheme { central, forward };

void check_finite(Real value, const std::string& what) {
    if (!std::isfinite(value)) throw NumericalError(what + " is not finite");
}

std::vector<Real> estimate(const LossFunction& loss, const std::vector<Real>& theta, const FdOptions& options,
                           Scheme scheme) {
    if (!(options.floor > 0.0) || options.relative < 0.0) {
        throw ParameterError("fd_gradient: step floor must be positive and relative step non-negative");
    }
    Real base = 0.0;
    if (scheme == Scheme::forward) {
        base = loss(theta);
        check_finite(base, "fd_gradient: loss at theta");
    }
    const std::size_t n = theta.size();
    std::vector<Real> grad(n, 0.0);
    std::vector<std::size_t> bad(n, 0);

    auto work = [&](std::size_t first, std::size_t stride) {
        std::vector<Real> probe = theta;
        for (std::size_t i = first; i < n; i += stride) {
            const Real h = options.step(theta[i]);
            probe[i] = theta[i] + h;
            const Real plus = loss(probe);
            Real minus = base;
            if (scheme == Scheme::central) {
                probe[i] = theta[i] - h;
                minus = loss(probe);
            }
            probe[i] = theta[i];
            if (!std::isfinite(plus) || !std::isfinite(minus)) {
                bad[i] = 1;
                continue;
            }
            grad[i] = scheme == Scheme::central ? (plus - minus) / (2.0 * h) : (plus - minus) / h;
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (bad[i]) throw NumericalError("fd_gradient: non-finite loss when perturbing coordinate " + std::to_string(i));
    }
    return grad;
}

}  // namespace

ParamVector flatten(const ModelWeights& weights) {
    ParamVector p;
    visit_parameters(weights, [&](const std::string& name, const Tensor& t) {
        p.manifest.push_back({name, p.values.size(), t.shape()});
        p.values.insert(p.values.end(), t.values().begin(), t.values().end());
    });
    return p;
}

void unflatten(const ParamVector& params, ModelWeights& weights) {
    std::size_t k = 0;
    visit_parameters(weights, [&](const std::string& name, Tensor& t) {
        if (k >= params.manifest.size()) throw ConfigError("unflatten: manifest has no entry for " + name);
        const ParamSlice& s = params.manifest[k++];
        if (s.name != name || s.shape != t.shape() || s.offset + t.size() > params.values.size()) {
            throw ConfigError("unflatten: manifest entry " + s.name + " " + shape_string(s.shape) +
                              " does not match " + name + " " + shape_string(t.shape()));
        }
        std::copy_n(params.values.begin() + static_cast<std::ptrdiff_t>(s.offset), t.size(), t.values().begin());
    });
    if (k != params.manifest.size()) throw ConfigError("unflatten: manifest has extra entries");
}

Real FdOptions::step(Real theta) const { return std::max(floor, relative * std::abs(theta)); }

std::vector<Real> fd_gradient(const LossFunction& loss, const std::vector<Real>& theta, const FdOptions& options) {
    return estimate(loss, theta, options, Scheme::central);
}

std::vector<Real> fd_gradient_forward(const LossFunction& loss, const std::vector<Real>& theta,
                                      const FdOptions& options) {
    return estimate(loss, theta, options, Scheme::forward);
}

TrainResult train_toy(const std::vector<PreparedFrame>& frames, const ModelWeights& initial,
                      const PipelineConfig& config, const TrainOptions& options) {
    if (options.learning_rate < 0.0) throw ParameterError("train_toy: learning rate must be non-negative");
    check_weights(initial, config);
    ParamVector params = flatten(initial);

    const LossFunction loss = [&](const std::vector<Real>& theta) {
        ModelWeights w = initial;
        unflatten({theta, params.manifest}, w);
        return sequence_loss(frames, w, config);
    };
    auto checked = [](Real value, std::size_t step) {
        if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
            throw NumericalError("train_toy: loss " + std::to_string(value) + " out of range at step " +
                                 std::to_string(step));
        }
        return value;
    };

    TrainResult result;
    result.trace.push_back(checked(loss(params.values), 0));
    for (std::size_t step = 0; step < options.steps; ++step) {
        std::vector<Real> grad;
        try {
            grad = fd_gradient(loss, params.values, options.fd);
        } catch (const NumericalError& e) {
            throw NumericalError("train_toy: step " + std::to_string(step) + ": " + e.what());
        }
        Real norm = 0.0;
        for (Real g : grad) norm += g * g;
        norm = std::sqrt(norm);
        const Real scale = (options.clip > 0.0 && norm > options.clip) ? options.clip / norm : 1.0;
        for (std::size_t i = 0; i < grad.size(); ++i) params.values[i] -= options.learning_rate * scale * grad[i];
        result.trace.push_back(checked(loss(params.values), step + 1));
    }
    result.weights = initial;
    unflatten(params, result.weights);
    return result;
}

}  // namespace pmn
