#include "doctest.h"
#include "pmn/errors.hpp"
#include "pmn/trainer.hpp"
#include "support/scenarios.hpp"

using namespace pmn;

namespace {

std::size_t offset_of(const ParamVector& p, const std::string& name) {
    for (const ParamSlice& s : p.manifest)
        if (s.name == name) return s.offset;
    FAIL("no parameter " << name);
    return 0;
}

}  // namespace

TEST_CASE("fd_gradient on analytic functions") {
    SUBCASE("sum of squares") {
        const LossFunction f = [](const std::vector<Real>& t) {
            Real s = 0.0;
            for (Real v : t) s += v * v;
            return s;
        };
        const std::vector<Real> theta{0.3, -1.2, 2.5, 0.0, 1e-3};
        const FdOptions opts{.relative = 0.0, .floor = 1e-4};
        const auto g = fd_gradient(f, theta, opts);
        for (std::size_t i = 0; i < theta.size(); ++i) CHECK(std::abs(g[i] - 2.0 * theta[i]) <= 1e-6);
        FdOptions threaded = opts;
        threaded.threads = 3;
        CHECK(fd_gradient(f, theta, threaded) == g);
    }
    SUBCASE("constant loss has zero gradient") {
        const auto g = fd_gradient([](const std::vector<Real>&) { return 0.25; }, {1.0, 2.0, 3.0});
        for (Real v : g) CHECK(v == 0.0);
    }
    SUBCASE("linear functional") {
        const std::vector<Real> a{1.5, -2.0, 0.25, 4.0};
        const LossFunction f = [&](const std::vector<Real>& t) {
            Real s = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) s += a[i] * t[i];
            return s;
        };
        const auto g = fd_gradient(f, {0.1, 2.0, -3.0, 0.0});
        const auto gf = fd_gradient_forward(f, {0.1, 2.0, -3.0, 0.0});
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(std::abs(g[i] - a[i]) <= 1e-8);
            CHECK(std::abs(gf[i] - a[i]) <= 1e-8);
        }
    }
    SUBCASE("step rule and errors") {
        const FdOptions o;
        CHECK(o.step(0.0) == 1e-4);
        CHECK(o.step(-5.0) == doctest::Approx(5e-3));
        const LossFunction nan_at_2 = [](const std::vector<Real>& t) {
            return t[2] != 0.0 ? std::numeric_limits<Real>::quiet_NaN() : 0.0;
        };
        CHECK_THROWS_WITH_AS(fd_gradient(nan_at_2, {0.0, 0.0, 0.0}), doctest::Contains("coordinate 2"),
                             NumericalError);
        CHECK_THROWS_AS(fd_gradient(nan_at_2, {0.0}, {.relative = 1e-3, .floor = 0.0}), ParameterError);
    }
}

TEST_CASE("flatten and unflatten") {
    PipelineConfig c = toy_config();
    c.tie_streams = false;
    const ModelWeights w = init_weights(c, 4);
    const ParamVector p = flatten(w);
    CHECK(p.size() == parameter_count(w));
    CHECK(p.manifest.front().offset == 0);
    ModelWeights target = init_weights(c, 5);
    unflatten(p, target);
    CHECK(weights_to_tensors(target).encode() == weights_to_tensors(w).encode());
    ModelWeights tied = init_weights(toy_config(), 5);
    CHECK_THROWS_AS(unflatten(p, tied), ConfigError);
}

TEST_CASE("central and forward differences agree on the toy loss") {
    const PipelineConfig config = toy_config();
    const auto frames = scenario::prepare_toy(toy_scene(), config);
    const ModelWeights base = init_weights(config, scenario::kToyWeightSeed);
    const ParamVector p = flatten(base);
    const std::vector<std::size_t> coords{offset_of(p, "decoder.head.bias"), offset_of(p, "decoder.head.weight"),
                                          offset_of(p, "decoder.head.weight") + 1};
    const LossFunction loss = [&](const std::vector<Real>& sub) {
        ParamVector q = p;
        for (std::size_t i = 0; i < coords.size(); ++i) q.values[coords[i]] = sub[i];
        ModelWeights w = base;
        unflatten(q, w);
        return sequence_loss(frames, w, config);
    };
    std::vector<Real> theta;
    for (std::size_t c : coords) theta.push_back(p.values[c]);
    const auto central = fd_gradient(loss, theta), forward = fd_gradient_forward(loss, theta);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        CHECK(std::abs(central[i]) > 1e-6);
        CHECK(std::abs(central[i] - forward[i]) <= 0.1 * std::abs(central[i]));
    }
}

TEST_CASE("train_toy edge cases") {
    const PipelineConfig config = toy_config();
    SynthScene scene = toy_scene();
    scene.frames = 2;
    const auto frames = scenario::prepare_toy(scene, config);
    const ModelWeights w = init_weights(config, 1);

    const TrainResult none = train_toy(frames, w, config, {.steps = 0});
    CHECK(none.trace.size() == 1);
    CHECK(weights_to_tensors(none.weights).encode() == weights_to_tensors(w).encode());

    const TrainResult frozen = train_toy(frames, w, config, {.steps = 2, .learning_rate = 0.0});
    REQUIRE(frozen.trace.size() == 3);
    CHECK(frozen.trace[0] == frozen.trace[1]);
    CHECK(frozen.trace[1] == frozen.trace[2]);
    CHECK(frozen.trace[0] == sequence_loss(frames, w, config));

    const TrainResult step = train_toy(frames, w, config, {.steps = 1, .learning_rate = 0.3});
    CHECK(step.trace[1] < step.trace[0]);
    CHECK_THROWS_AS(train_toy(frames, w, config, {.steps = 1, .learning_rate = -1.0}), ParameterError);
}
