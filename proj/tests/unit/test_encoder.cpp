#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pmn/color.hpp"
#include "pmn/encoder.hpp"
#include "pmn/errors.hpp"
#include "pmn/tensor_file.hpp"
#include "support/oracles.hpp"

using namespace pmn;
namespace fs = std::filesystem;

namespace {

// Pooled |Sobel x| of L/100 with replicate borders, computed pixel by pixel.
Real pooled_gx(const Image& img, std::size_t stride, std::size_t cy, std::size_t cx) {
    auto L = [&](long y, long x) {
        y = std::clamp<long>(y, 0, long(img.height) - 1);
        x = std::clamp<long>(x, 0, long(img.width) - 1);
        const auto i = static_cast<std::size_t>(y), j = static_cast<std::size_t>(x);
        return rgb_to_lab(img.at(i, j, 0), img.at(i, j, 1), img.at(i, j, 2))[0] / 100.0;
    };
    Real sum = 0.0;
    for (long y = long(cy * stride); y < long((cy + 1) * stride); ++y)
        for (long x = long(cx * stride); x < long((cx + 1) * stride); ++x) {
            Real g = 0.0;
            for (long d = -1; d <= 1; ++d) g += (d == 0 ? 2.0 : 1.0) * (L(y + d, x + 1) - L(y + d, x - 1));
            sum += std::abs(g);
        }
    return sum / Real(stride * stride);
}

}  // namespace

TEST_CASE("handcrafted features on a constant image") {
    const Image img(32, 48, 0.3);
    const FeaturePyramid p = handcrafted_features(img, {6, 6, 6});
    CHECK(p.source == FeatureSource::handcrafted);
    CHECK(p.e1.shape() == Shape{6, 8, 12});
    CHECK(p.e2.shape() == Shape{6, 4, 6});
    CHECK(p.e3.shape() == Shape{6, 2, 3});
    const Lab lab = rgb_to_lab(0.3, 0.3, 0.3);
    for (std::size_t r = 0; r < 3; ++r) {
        const Tensor& t = p.level(r);
        for (std::size_t i = 0; i < t.plane(0).size(); ++i) {
            CHECK(t.plane(0)[i] == doctest::Approx(lab[0] / 100.0));
            CHECK(t.plane(3)[i] == 0.0);
            CHECK(t.plane(4)[i] == 0.0);
            CHECK(t.plane(5)[i] == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("vertical step edge peaks in the horizontal-gradient channel") {
    Image img(32, 32, 0.1);
    for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 18; x < 32; ++x) img.set(y, x, {0.9, 0.9, 0.9});
    const FeaturePyramid p = handcrafted_features(img, {6, 6, 6});
    const std::size_t strides[3] = {4, 8, 16};
    for (std::size_t r = 0; r < 3; ++r) {
        const Tensor& t = p.level(r);
        const std::size_t edge_cell = 18 / strides[r];
        for (std::size_t cy = 0; cy < t.dim(1); ++cy) {
            for (std::size_t cx = 0; cx < t.dim(2); ++cx) {
                CHECK(t(3, cy, cx) == doctest::Approx(pooled_gx(img, strides[r], cy, cx)).epsilon(1e-12));
                if (cx != edge_cell) CHECK(t(3, cy, cx) < t(3, cy, edge_cell));
                CHECK(t(4, cy, cx) == doctest::Approx(0.0));
            }
        }
    }
}

TEST_CASE("handcrafted features are deterministic and tile the base channels") {
    Rng rng(3);
    const Image img = oracle::random_image(rng, 16, 32);
    const FeaturePyramid a = handcrafted_features(img, {14, 7, 3});
    const FeaturePyramid b = handcrafted_features(img, {14, 7, 3});
    CHECK(a.e1 == b.e1);
    CHECK(a.e2 == b.e2);
    CHECK(a.e3 == b.e3);
    for (std::size_t c = 6; c < 14; ++c) {
        const auto src = a.e1.plane(c % 6), dst = a.e1.plane(c);
        CHECK(std::equal(src.begin(), src.end(), dst.begin()));
    }
    a.validate();
    CHECK_THROWS_AS(handcrafted_features(Image(20, 32, 0.0)), DimensionError);
}

TEST_CASE("feature container round trip and errors") {
    Rng rng(4);
    FeaturePyramid p{oracle::random_tensor(rng, {3, 8, 4}), oracle::random_tensor(rng, {5, 4, 2}),
                     oracle::random_tensor(rng, {2, 2, 1}), FeatureSource::external};
    const fs::path dir = fs::temp_directory_path() / "pmn_unit";
    fs::create_directories(dir);
    const fs::path path = dir / "features.pmnt";
    save_features(path, p);
    const FeaturePyramid q = load_features(path);
    CHECK(q.source == FeatureSource::file);
    CHECK(q.e1 == p.e1);
    CHECK(q.e2 == p.e2);
    CHECK(q.e3 == p.e3);

    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    const fs::path bad = dir / "bad_features.pmnt";
    std::ofstream(bad, std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    CHECK_THROWS_AS(load_features(bad), FormatError);
    std::string wrong = bytes;
    wrong[3] = 'Q';
    std::ofstream(bad, std::ios::binary | std::ios::trunc) << wrong;
    CHECK_THROWS_WITH_AS(load_features(bad), doctest::Contains("magic"), FormatError);

    FeaturePyramid mismatched{oracle::random_tensor(rng, {3, 8, 4}), oracle::random_tensor(rng, {5, 3, 2}),
                              oracle::random_tensor(rng, {2, 2, 1}), FeatureSource::external};
    CHECK_THROWS_AS(save_features(bad, mismatched), DimensionError);
    TensorFile raw;
    raw.add("e1", mismatched.e1);
    raw.add("e2", mismatched.e2);
    raw.add("e3", mismatched.e3);
    raw.save(bad);
    CHECK_THROWS_WITH_AS(load_features(bad), doctest::Contains("e2"), FormatError);
}
