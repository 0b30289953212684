#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pmn/image.hpp"

namespace pmn {

/// Flow visualization on the Middlebury color wheel, blended toward mid-gray
/// by magnitude: color = 0.5 + s * (wheel(angle) - 0.5), s = min(1, |v| / max_flow).
/// Zero motion maps to (0.5, 0.5, 0.5).
std::array<Real, 3> flow_color(Real dx, Real dy, Real max_flow);

/// A rigid square translating over a static textured background.
struct SynthScene {
    std::size_t height = 64;
    std::size_t width = 64;
    std::size_t frames = 10;
    std::size_t object_size = 16;
    std::array<Real, 3> object_color = {0.90, 0.20, 0.15};
    long start_y = 8;
    long start_x = 8;
    long velocity_y = 0;  // pixels per frame
    long velocity_x = 4;
    // frames in which the object is not drawn (occlusion); gt is empty there
    std::vector<std::size_t> hidden_frames;
    Real max_flow = 8.0;
    std::uint64_t seed = 7;
};

struct SynthSequence {
    std::vector<Image> rgb;
    std::vector<Image> flow;  // flow[t] encodes motion from t to t+1
    std::vector<BinaryMask> gt;
};

SynthSequence synth_generate(const SynthScene& scene);

/// 32x32, 8 frames, 10x10 square moving diagonally.
SynthScene toy_scene();

/// toy_scene with the object hidden in frames 4 and 5.
SynthScene toy_occlusion_scene();

/// 64x64, 10 frames, 16x16 square.
SynthScene desk_scene();

}  // namespace pmn
