#include <cmath>
#include <numeric>

#include "doctest.h"
#include "pmn/errors.hpp"
#include "pmn/numerics.hpp"
#include "pmn/rng.hpp"
#include "support/oracles.hpp"

using namespace pmn;

namespace {

AttentionParams random_attention(Rng& rng, std::size_t c, std::size_t heads) {
    return {oracle::random_linear(rng, c, c), oracle::random_linear(rng, c, c), oracle::random_linear(rng, c, c),
            oracle::random_linear(rng, c, c), heads};
}

}  // namespace

TEST_CASE("tensor rejects zero extents and mismatched data") {
    CHECK_THROWS_AS(Tensor({2, 0}), DimensionError);
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<Real>{1, 2, 3}), DimensionError);
    const Tensor t({2, 3}, std::vector<Real>{1, 2, 3, 4, 5, 6});
    CHECK(t(1, 2) == 6);
    CHECK(t.row(1)[0] == 4);
    CHECK_THROWS_AS(t.dim(2), DimensionError);
    CHECK(shape_string(t.shape()) == "[2x3]");
}

TEST_CASE("matmul") {
    SUBCASE("identity") {
        Rng rng(1);
        const Tensor a = oracle::random_tensor(rng, {3, 4});
        Tensor eye = Tensor::matrix(3, 3);
        for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
        CHECK(matmul(eye, a) == a);
    }
    SUBCASE("hand arithmetic") {
        const Tensor a({2, 2}, std::vector<Real>{1, 2, 3, 4});
        const Tensor b({2, 1}, std::vector<Real>{0, 1});
        CHECK(matmul(a, b) == Tensor({2, 1}, std::vector<Real>{2, 4}));
    }
    SUBCASE("triple-loop oracle") {
        Rng rng(2);
        const Tensor a = oracle::random_tensor(rng, {5, 7}), b = oracle::random_tensor(rng, {7, 3});
        const Tensor got = matmul(a, b), want = oracle::matmul(a, b);
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
    SUBCASE("shape mismatch names both shapes") {
        try {
            matmul(Tensor::matrix(2, 3), Tensor::matrix(2, 3));
            FAIL("expected DimensionError");
        } catch (const DimensionError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("2x3") != std::string::npos);
        }
    }
}

TEST_CASE("softmax_rows") {
    const Real ln3 = std::log(3.0);
    const Tensor x({3, 2}, std::vector<Real>{0, 0, 1000, 1000, 0, ln3});
    const Tensor s = softmax_rows(x);
    CHECK(s(0, 0) == doctest::Approx(0.5));
    CHECK(s(1, 0) == doctest::Approx(0.5));
    CHECK(s(1, 1) == doctest::Approx(0.5));
    CHECK(s(2, 0) == doctest::Approx(0.25));
    CHECK(s(2, 1) == doctest::Approx(0.75));

    Rng rng(3);
    const Tensor r = oracle::random_tensor(rng, {6, 9}, -5, 5);
    Tensor shifted = r;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 9; ++j) shifted(i, j) += static_cast<Real>(i) * 3.7;
    const Tensor a = softmax_rows(r), b = softmax_rows(shifted);
    for (std::size_t i = 0; i < 6; ++i) {
        Real sum = 0.0;
        for (std::size_t j = 0; j < 9; ++j) {
            CHECK(a(i, j) >= 0.0);
            CHECK(std::abs(a(i, j) - b(i, j)) <= 1e-6);
            sum += a(i, j);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
}

TEST_CASE("layer_norm") {
    const LayerNormParams unit{Tensor({2}, 1.0), Tensor({2}, 0.0)};
    SUBCASE("constant row") {
        const Tensor y = layer_norm(Tensor({1, 2}, 3.0), unit);
        CHECK(y[0] == 0.0);
        CHECK(y[1] == 0.0);
    }
    SUBCASE("already normalized row") {
        const Tensor y = layer_norm(Tensor({1, 2}, std::vector<Real>{-1, 1}), unit);
        CHECK(y[0] == doctest::Approx(-1.0).epsilon(1e-5));
        CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("two-pass oracle and moments") {
        Rng rng(4);
        const std::size_t c = 11;
        const Tensor x = oracle::random_tensor(rng, {5, c}, -3, 3);
        const LayerNormParams p = oracle::random_norm(rng, c);
        const Tensor y = layer_norm(x, p);
        for (std::size_t i = 0; i < 5; ++i) {
            const auto want = oracle::layer_norm(oracle::row_of(x, i), p, kLayerNormEps);
            for (std::size_t j = 0; j < c; ++j) CHECK(std::abs(y(i, j) - want[j]) <= 1e-6);
        }
        const Tensor z = layer_norm(x, {Tensor({c}, 1.0), Tensor({c}, 0.0)});
        for (std::size_t i = 0; i < 5; ++i) {
            Real mean = 0.0, var = 0.0;
            for (std::size_t j = 0; j < c; ++j) mean += z(i, j) / c;
            for (std::size_t j = 0; j < c; ++j) var += (z(i, j) - mean) * (z(i, j) - mean) / c;
            CHECK(std::abs(mean) <= 1e-5);
            CHECK(std::abs(var - 1.0) <= 1e-3);
        }
    }
    CHECK_THROWS_AS(layer_norm(Tensor({1, 3}), unit), DimensionError);
}

TEST_CASE("multi_head_attention") {
    Rng rng(5);
    SUBCASE("single token returns the projected value") {
        const AttentionParams p = random_attention(rng, 4, 2);
        const Tensor x = oracle::random_tensor(rng, {1, 4});
        const auto want = oracle::affine(p.output, oracle::affine(p.value, oracle::row_of(x, 0)));
        const Tensor y = multi_head_attention(x, p);
        for (std::size_t j = 0; j < 4; ++j) CHECK(y(0, j) == doctest::Approx(want[j]).epsilon(1e-12));
    }
    SUBCASE("per-head loop oracle, 3x8 with 2 heads") {
        const AttentionParams p = random_attention(rng, 8, 2);
        const Tensor x = oracle::random_tensor(rng, {3, 8});
        std::vector<std::vector<Real>> rows;
        for (std::size_t i = 0; i < 3; ++i) rows.push_back(oracle::row_of(x, i));
        const auto want = oracle::attention(rows, p);
        const Tensor y = multi_head_attention(x, p);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(y(i, j) - want[i][j]) <= 1e-6);
    }
    SUBCASE("row permutation equivariance") {
        const AttentionParams p = random_attention(rng, 8, 4);
        const Tensor x = oracle::random_tensor(rng, {6, 8});
        const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
        Tensor px = x;
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 8; ++j) px(i, j) = x(perm[i], j);
        const Tensor y = multi_head_attention(x, p), py = multi_head_attention(px, p);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(py(i, j) - y(perm[i], j)) <= 1e-5);
    }
    SUBCASE("width not divisible by heads") {
        const AttentionParams p = random_attention(rng, 6, 4);
        CHECK_THROWS_AS(multi_head_attention(Tensor({2, 6}), p), ConfigError);
    }
}

TEST_CASE("bilinear_resize") {
    SUBCASE("constant volume stays constant") {
        const Tensor y = bilinear_resize(Tensor({2, 3, 5}, 0.7), 7, 4);
        for (Real v : y.values()) CHECK(v == doctest::Approx(0.7));
    }
    SUBCASE("1x1 replicates") {
        const Tensor y = bilinear_resize(Tensor({1, 1, 1}, -2.0), 3, 3);
        for (Real v : y.values()) CHECK(v == -2.0);
    }
    SUBCASE("checkerboard 2x2 to 4x4 matches direct formula") {
        const Tensor x({1, 2, 2}, std::vector<Real>{1, 0, 0, 1});
        const Tensor y = bilinear_resize(x, 4, 4);
        for (std::size_t oy = 0; oy < 4; ++oy)
            for (std::size_t ox = 0; ox < 4; ++ox)
                CHECK(std::abs(y(0, oy, ox) - oracle::bilinear_at(x, 0, oy, ox, 4, 4)) <= 1e-6);
        CHECK(y(0, 0, 0) == 1.0);
        CHECK(y(0, 1, 1) == doctest::Approx(0.625));
    }
    SUBCASE("random downsample and bounds") {
        Rng rng(6);
        const Tensor x = oracle::random_tensor(rng, {2, 9, 6});
        const Tensor y = bilinear_resize(x, 4, 13);
        const auto [lo, hi] = std::minmax_element(x.values().begin(), x.values().end());
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t oy = 0; oy < 4; ++oy)
                for (std::size_t ox = 0; ox < 13; ++ox) {
                    CHECK(std::abs(y(c, oy, ox) - oracle::bilinear_at(x, c, oy, ox, 4, 13)) <= 1e-6);
                    CHECK(y(c, oy, ox) >= *lo - 1e-6);
                    CHECK(y(c, oy, ox) <= *hi + 1e-6);
                }
    }
    CHECK_THROWS_AS(bilinear_resize(Tensor({1, 2, 2}), 0, 3), DimensionError);
}

TEST_CASE("cosine_similarity") {
    const std::vector<Real> u{1, 2, 3}, u3{3, 6, 9}, e0{1, 0, 0}, e1{0, 1, 0}, zero{0, 0, 0};
    CHECK(cosine_similarity(u, u) == doctest::Approx(1.0));
    CHECK(cosine_similarity(e0, e1) == 0.0);
    CHECK(cosine_similarity(u, u3) == doctest::Approx(1.0));
    CHECK(cosine_similarity(u, zero) == 0.0);
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        std::vector<Real> a(5), b(5);
        for (auto& v : a) v = rng.uniform(-1, 1);
        for (auto& v : b) v = rng.uniform(-1, 1);
        const Real c = cosine_similarity(a, b);
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
        CHECK(c == doctest::Approx(cosine_similarity(b, a)).epsilon(1e-14));
        CHECK(std::abs(c - oracle::cosine(a, b)) <= 1e-12);
    }
}

TEST_CASE("activations") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(2.0) == doctest::Approx(oracle::sigmoid(2.0)));
    CHECK(relu(-1.0) == 0.0);
    CHECK(relu(2.5) == 2.5);
    CHECK(gelu(0.0) == 0.0);
    CHECK(gelu(1.0) == doctest::Approx(0.8413447460685429));
}

TEST_CASE("linear maps") {
    Rng rng(8);
    const LinearParams p = oracle::random_linear(rng, 5, 3);
    const Tensor x = oracle::random_tensor(rng, {4, 5});
    const Tensor y = linear_map(x, p);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto want = oracle::affine(p, oracle::row_of(x, i));
        for (std::size_t o = 0; o < 3; ++o) CHECK(std::abs(y(i, o) - want[o]) <= 1e-12);
    }
    const Tensor vol = oracle::random_tensor(rng, {5, 3, 2});
    const Tensor pv = linear_map_pixels(vol, p);
    for (std::size_t yy = 0; yy < 3; ++yy)
        for (std::size_t xx = 0; xx < 2; ++xx) {
            const auto want = oracle::affine(p, oracle::pixel(vol, yy, xx));
            for (std::size_t o = 0; o < 3; ++o) CHECK(std::abs(pv(o, yy, xx) - want[o]) <= 1e-12);
        }
    CHECK_THROWS_AS(linear_map(Tensor({2, 4}), p), ConfigError);
    CHECK_THROWS_AS(linear_map_pixels(Tensor({4, 2, 2}), p), ConfigError);
}
