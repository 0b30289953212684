#include "pmn/encoder.hpp"

#include <array>
#include <cmath>

#include "pmn/color.hpp"
#include "pmn/errors.hpp"
#include "pmn/tensor_file.hpp"

namespace pmn {

namespace {

constexpr std::array<std::size_t, 3> kStrides = {4, 8, 16};

// Replicate-border Sobel on a single plane.
void sobel(const std::vector<Real>& plane, std::size_t h, std::size_t w, std::vector<Real>& gx,
           std::vector<Real>& gy) {
    gx.assign(h * w, 0.0);
    gy.assign(h * w, 0.0);
    auto at = [&](long y, long x) {
        y = std::clamp<long>(y, 0, static_cast<long>(h) - 1);
        x = std::clamp<long>(x, 0, static_cast<long>(w) - 1);
        return plane[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
    };
    for (long y = 0; y < static_cast<long>(h); ++y) {
        for (long x = 0; x < static_cast<long>(w); ++x) {
            const Real dx = (at(y - 1, x + 1) + 2 * at(y, x + 1) + at(y + 1, x + 1)) -
                            (at(y - 1, x - 1) + 2 * at(y, x - 1) + at(y + 1, x - 1));
            const Real dy = (at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1)) -
                            (at(y - 1, x - 1) + 2 * at(y - 1, x) + at(y - 1, x + 1));
            gx[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = dx;
            gy[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = dy;
        }
    }
}

Tensor pooled_level(const std::array<std::vector<Real>, 5>& base, std::size_t h, std::size_t w, std::size_t stride,
                    std::size_t channels) {
    const std::size_t ph = h / stride, pw = w / stride;
    const Real area = static_cast<Real>(stride * stride);
    std::array<std::vector<Real>, kHandcraftedBase> pooled;
    for (auto& p : pooled) p.assign(ph * pw, 0.0);
    for (std::size_t cy = 0; cy < ph; ++cy) {
        for (std::size_t cx = 0; cx < pw; ++cx) {
            std::array<Real, 5> sums{};
            for (std::size_t y = cy * stride; y < (cy + 1) * stride; ++y)
                for (std::size_t x = cx * stride; x < (cx + 1) * stride; ++x)
                    for (std::size_t b = 0; b < 5; ++b) sums[b] += base[b][y * w + x];
            const std::size_t cell = cy * pw + cx;
            for (std::size_t b = 0; b < 5; ++b) pooled[b][cell] = sums[b] / area;
            // two-pass variance of lightness
            const Real mean = pooled[0][cell];
            Real var = 0.0;
            for (std::size_t y = cy * stride; y < (cy + 1) * stride; ++y)
                for (std::size_t x = cx * stride; x < (cx + 1) * stride; ++x) {
                    const Real d = base[0][y * w + x] - mean;
                    var += d * d;
                }
            pooled[5][cell] = var / area;
        }
    }
    Tensor out = Tensor::volume(channels, ph, pw);
    for (std::size_t c = 0; c < channels; ++c) {
        const auto& src = pooled[c % kHandcraftedBase];
        std::copy(src.begin(), src.end(), out.plane(c).begin());
    }
    return out;
}

void check_level(const Tensor& t, std::size_t r, std::size_t h, std::size_t w) {
    if (t.rank() != 3 || t.dim(1) != h || t.dim(2) != w) {
        throw DimensionError("feature level e" + std::to_string(r + 1) + " has shape " + shape_string(t.shape()) +
                             ", expected Cx" + std::to_string(h) + "x" + std::to_string(w));
    }
}

}  // namespace

const Tensor& FeaturePyramid::level(std::size_t r) const {
    switch (r) {
        case 0: return e1;
        case 1: return e2;
        case 2: return e3;
        default: throw DimensionError("pyramid level " + std::to_string(r) + " out of range");
    }
}

void FeaturePyramid::validate() const {
    if (e1.rank() != 3) throw DimensionError("feature level e1 has shape " + shape_string(e1.shape()));
    const std::size_t h = e1.dim(1) * 4, w = e1.dim(2) * 4;
    if (h % 16 != 0 || w % 16 != 0) {
        throw DimensionError("pyramid implies image " + std::to_string(h) + "x" + std::to_string(w) +
                             ", which is not divisible by 16");
    }
    for (std::size_t r = 0; r < 3; ++r) {
        check_level(level(r), r, h / kStrides[r], w / kStrides[r]);
        if (!level(r).all_finite()) throw NumericalError("feature level e" + std::to_string(r + 1) + " is not finite");
    }
}

FeaturePyramid handcrafted_features(const Image& image, const EncoderChannels& channels) {
    const std::size_t h = image.height, w = image.width;
    if (h == 0 || w == 0 || h % 16 != 0 || w % 16 != 0) {
        throw DimensionError("handcrafted_features: image " + std::to_string(h) + "x" + std::to_string(w) +
                             " is not divisible by 16");
    }
    if (channels.c1 == 0 || channels.c2 == 0 || channels.c3 == 0) {
        throw ConfigError("handcrafted_features: channel counts must be positive");
    }
    const auto lab = image_to_lab(image);
    // L, a, b scaled to about [-1, 1]; then |Gx|, |Gy| of L
    std::array<std::vector<Real>, 5> base;
    for (auto& b : base) b.resize(h * w);
    for (std::size_t p = 0; p < h * w; ++p) {
        base[0][p] = lab[p][0] / 100.0;
        base[1][p] = lab[p][1] / 100.0;
        base[2][p] = lab[p][2] / 100.0;
    }
    std::vector<Real> gx, gy;
    sobel(base[0], h, w, gx, gy);
    for (std::size_t p = 0; p < h * w; ++p) {
        base[3][p] = std::abs(gx[p]);
        base[4][p] = std::abs(gy[p]);
    }
    FeaturePyramid out;
    out.e1 = pooled_level(base, h, w, kStrides[0], channels.c1);
    out.e2 = pooled_level(base, h, w, kStrides[1], channels.c2);
    out.e3 = pooled_level(base, h, w, kStrides[2], channels.c3);
    out.source = FeatureSource::handcrafted;
    return out;
}

FeatureExtractor handcrafted_extractor(EncoderChannels channels) {
    return [channels](const Image& image, Stream, std::size_t) { return handcrafted_features(image, channels); };
}

void save_features(const std::filesystem::path& path, const FeaturePyramid& pyramid) {
    pyramid.validate();
    TensorFile file;
    file.add("e1", pyramid.e1);
    file.add("e2", pyramid.e2);
    file.add("e3", pyramid.e3);
    file.save(path);
}

FeaturePyramid load_features(const std::filesystem::path& path) {
    const TensorFile file = TensorFile::load(path);
    FeaturePyramid out;
    out.e1 = file.get("e1");
    out.e2 = file.get("e2");
    out.e3 = file.get("e3");
    out.source = FeatureSource::file;
    try {
        out.validate();
    } catch (const DimensionError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return out;
}

}  // namespace pmn
