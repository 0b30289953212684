#include "pmn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmn/errors.hpp"
#include "pmn/rng.hpp"

namespace pmn {

namespace {

// Middlebury color wheel: RY, YG, GC, CB, BM, MR segments.
std::vector<std::array<Real, 3>> make_color_wheel() {
    constexpr int ry = 15, yg = 6, gc = 4, cb = 11, bm = 13, mr = 6;
    std::vector<std::array<Real, 3>> wheel;
    for (int i = 0; i < ry; ++i) wheel.push_back({1.0, Real(i) / ry, 0.0});
    for (int i = 0; i < yg; ++i) wheel.push_back({1.0 - Real(i) / yg, 1.0, 0.0});
    for (int i = 0; i < gc; ++i) wheel.push_back({0.0, 1.0, Real(i) / gc});
    for (int i = 0; i < cb; ++i) wheel.push_back({0.0, 1.0 - Real(i) / cb, 1.0});
    for (int i = 0; i < bm; ++i) wheel.push_back({Real(i) / bm, 0.0, 1.0});
    for (int i = 0; i < mr; ++i) wheel.push_back({1.0, 0.0, 1.0 - Real(i) / mr});
    return wheel;
}

bool hidden(const SynthScene& s, std::size_t t) {
    return std::find(s.hidden_frames.begin(), s.hidden_frames.end(), t) != s.hidden_frames.end();
}

}  // namespace

std::array<Real, 3> flow_color(Real dx, Real dy, Real max_flow) {
    if (!(max_flow > 0.0)) throw ParameterError("flow_color: max_flow must be positive");
    static const auto wheel = make_color_wheel();
    const Real rad = std::sqrt(dx * dx + dy * dy);
    if (rad == 0.0) return {0.5, 0.5, 0.5};
    const auto ncols = static_cast<Real>(wheel.size());
    const Real angle = std::atan2(-dy, -dx) / std::numbers::pi;
    const Real fk = (angle + 1.0) / 2.0 * (ncols - 1.0);
    const auto k0 = static_cast<std::size_t>(std::floor(fk));
    const std::size_t k1 = (k0 + 1) % wheel.size();
    const Real f = fk - static_cast<Real>(k0);
    const Real s = std::min(1.0, rad / max_flow);
    std::array<Real, 3> out{};
    for (std::size_t c = 0; c < 3; ++c) {
        const Real col = (1.0 - f) * wheel[k0][c] + f * wheel[k1][c];
        out[c] = 0.5 + s * (col - 0.5);
    }
    return out;
}

SynthSequence synth_generate(const SynthScene& scene) {
    const long h = static_cast<long>(scene.height), w = static_cast<long>(scene.width);
    const long size = static_cast<long>(scene.object_size);
    if (h == 0 || w == 0 || scene.frames == 0 || size == 0) {
        throw ParameterError("synth_generate: image size, frame count and object size must be positive");
    }
    for (std::size_t t = 0; t < scene.frames; ++t) {
        const long y = scene.start_y + static_cast<long>(t) * scene.velocity_y;
        const long x = scene.start_x + static_cast<long>(t) * scene.velocity_x;
        if (y < 0 || x < 0 || y + size > h || x + size > w) {
            throw ParameterError("synth_generate: object leaves the image at frame " + std::to_string(t) + " (y=" +
                                 std::to_string(y) + ", x=" + std::to_string(x) + ")");
        }
    }

    // static background: 4x4 blocks of muted blue-gray noise over a horizontal ramp
    Image background(scene.height, scene.width);
    Rng rng(scene.seed);
    const std::size_t bh = (scene.height + 3) / 4, bw = (scene.width + 3) / 4;
    std::vector<Real> blocks(bh * bw);
    for (Real& b : blocks) b = rng.uniform(-0.06, 0.06);
    for (std::size_t y = 0; y < scene.height; ++y) {
        for (std::size_t x = 0; x < scene.width; ++x) {
            const Real n = blocks[(y / 4) * bw + x / 4];
            const Real ramp = 0.1 * static_cast<Real>(x) / static_cast<Real>(scene.width);
            background.set(y, x, {0.30 + ramp + n, 0.40 + n, 0.50 - ramp + n});
        }
    }

    SynthSequence seq;
    const auto motion = flow_color(static_cast<Real>(scene.velocity_x), static_cast<Real>(scene.velocity_y),
                                   scene.max_flow);
    for (std::size_t t = 0; t < scene.frames; ++t) {
        const long oy = scene.start_y + static_cast<long>(t) * scene.velocity_y;
        const long ox = scene.start_x + static_cast<long>(t) * scene.velocity_x;
        Image rgb = background;
        Image flow(scene.height, scene.width, 0.5);
        BinaryMask gt(scene.height, scene.width);
        if (!hidden(scene, t)) {
            for (long y = oy; y < oy + size; ++y) {
                for (long x = ox; x < ox + size; ++x) {
                    const auto yy = static_cast<std::size_t>(y), xx = static_cast<std::size_t>(x);
                    rgb.set(yy, xx, scene.object_color);
                    flow.set(yy, xx, motion);
                    gt.at(yy, xx) = 1;
                }
            }
        }
        seq.rgb.push_back(std::move(rgb));
        seq.flow.push_back(std::move(flow));
        seq.gt.push_back(std::move(gt));
    }
    return seq;
}

SynthScene toy_scene() {
    SynthScene s;
    s.height = 32;
    s.width = 32;
    s.frames = 8;
    s.object_size = 10;
    s.start_y = 4;
    s.start_x = 3;
    s.velocity_y = 2;
    s.velocity_x = 2;
    return s;
}

SynthScene toy_occlusion_scene() {
    SynthScene s = toy_scene();
    s.hidden_frames = {4, 5};
    return s;
}

SynthScene desk_scene() {
    SynthScene s;
    s.velocity_y = 2;
    s.velocity_x = 4;
    return s;
}

}  // namespace pmn
