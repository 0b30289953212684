#include "pmn/color.hpp"

#include <cmath>

namespace pmn {

namespace {

Real linearize(Real c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }

Real lab_f(Real t) {
    constexpr Real delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

Lab rgb_to_lab(Real r, Real g, Real b) {
    r = linearize(r);
    g = linearize(g);
    b = linearize(b);
    const Real x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
    const Real y = (0.2126729 * r + 0.7151522 * g + 0.0721750 * b);
    const Real z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
    const Real fx = lab_f(x), fy = lab_f(y), fz = lab_f(z);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::vector<Lab> image_to_lab(const Image& image) {
    std::vector<Lab> out(image.height * image.width);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = rgb_to_lab(image.pixels[3 * i], image.pixels[3 * i + 1], image.pixels[3 * i + 2]);
    }
    return out;
}

}  // namespace pmn
