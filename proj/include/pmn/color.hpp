#pragma once

#include <array>
#include <vector>

#include "pmn/image.hpp"

namespace pmn {

using Lab = std::array<Real, 3>;

/// sRGB in [0,1] (D65) to CIELAB. L in [0,100], a/b roughly in [-128,127].
Lab rgb_to_lab(Real r, Real g, Real b);

/// Per-pixel conversion, row-major.
std::vector<Lab> image_to_lab(const Image& image);

}  // namespace pmn
