#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pmn/color.hpp"
#include "pmn/errors.hpp"
#include "pmn/image.hpp"
#include "pmn/tensor_file.hpp"
#include "support/oracles.hpp"

using namespace pmn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "pmn_unit";
    fs::create_directories(dir);
    return dir / name;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
}

}  // namespace

TEST_CASE("ppm round trip at 8-bit precision") {
    Rng rng(1);
    Image img = oracle::random_image(rng, 5, 7);
    for (Real& v : img.pixels) v = std::round(v * 255.0) / 255.0;
    const fs::path p = scratch("rt.ppm");
    write_ppm(p, img);
    const Image back = read_ppm(p);
    REQUIRE(back.height == 5);
    REQUIRE(back.width == 7);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) CHECK(back.pixels[i] == doctest::Approx(img.pixels[i]));
}

TEST_CASE("pnm readers reject malformed files") {
    const fs::path p = scratch("bad.ppm");
    write_bytes(p, "P3\n2 2\n255\n");
    CHECK_THROWS_AS(read_ppm(p), FormatError);
    write_bytes(p, "P6\n2 2\n255\nab");
    CHECK_THROWS_AS(read_ppm(p), FormatError);
    CHECK_THROWS_AS(read_ppm(scratch("missing.ppm")), FormatError);
}

TEST_CASE("mask pgm round trip and nonzero foreground") {
    BinaryMask m(3, 4);
    m.at(0, 1) = 1;
    m.at(2, 3) = 1;
    const fs::path p = scratch("m.pgm");
    write_mask_pgm(p, m);
    CHECK(read_mask_pgm(p) == m);

    SegMask soft{2, 2, {0.0, 0.25, 0.5, 1.0}};
    write_mask_pgm(p, soft);
    std::size_t h = 0, w = 0;
    const auto vals = read_pgm(p, h, w);
    CHECK(h == 2);
    CHECK(w == 2);
    CHECK(vals[1] == doctest::Approx(64.0 / 255.0));
    CHECK(vals[3] == 1.0);
}

TEST_CASE("16-bit label pgm keeps raw levels") {
    const std::vector<std::uint16_t> levels{0, 1, 300, 65535, 7, 1000};
    const fs::path p = scratch("labels.pgm");
    write_pgm16(p, 2, 3, levels);
    std::size_t h = 0, w = 0;
    CHECK(read_pgm16_levels(p, h, w) == levels);
    CHECK(h == 2);
    CHECK(w == 3);
}

TEST_CASE("soft mask binarization at 0.5") {
    const SegMask s{1, 4, {0.49, 0.5, 0.51, 0.0}};
    const BinaryMask b = s.binarize();
    CHECK(b.bits == std::vector<std::uint8_t>{0, 1, 1, 0});
    CHECK(to_soft(b).values == std::vector<Real>{0, 1, 1, 0});
}

TEST_CASE("rgb_to_lab reference values") {
    const Lab white = rgb_to_lab(1, 1, 1);
    CHECK(white[0] == doctest::Approx(100.0).epsilon(1e-4));
    CHECK(std::abs(white[1]) < 1e-3);
    CHECK(std::abs(white[2]) < 1e-3);
    const Lab black = rgb_to_lab(0, 0, 0);
    CHECK(black[0] == doctest::Approx(0.0));
    // sRGB red: L 53.24, a 80.09, b 67.20
    const Lab red = rgb_to_lab(1, 0, 0);
    CHECK(red[0] == doctest::Approx(53.24).epsilon(1e-3));
    CHECK(red[1] == doctest::Approx(80.09).epsilon(1e-3));
    CHECK(red[2] == doctest::Approx(67.20).epsilon(1e-3));
}

TEST_CASE("tensor container") {
    Rng rng(2);
    TensorFile f;
    f.add("alpha", oracle::random_tensor(rng, {2, 3}));
    f.add("beta.gamma", oracle::random_tensor(rng, {4}));
    const std::string bytes = f.encode();
    CHECK(bytes.substr(0, 8) == "PMNTNSR1");

    SUBCASE("round trip is bit-exact") {
        const TensorFile g = TensorFile::decode(bytes);
        REQUIRE(g.size() == 2);
        CHECK(g.get("alpha") == f.get("alpha"));
        CHECK(g.get("beta.gamma") == f.get("beta.gamma"));
        CHECK(g.encode() == bytes);
    }
    SUBCASE("bad names") {
        CHECK_THROWS_AS(f.add("alpha", Tensor({1})), ParameterError);
        CHECK_THROWS_AS(f.add("has space", Tensor({1})), ParameterError);
        CHECK_THROWS_AS(f.get("nope"), FormatError);
    }
    SUBCASE("wrong magic") {
        std::string b = bytes;
        b[0] = 'X';
        CHECK_THROWS_WITH_AS(TensorFile::decode(b), doctest::Contains("magic"), FormatError);
    }
    SUBCASE("truncated") {
        CHECK_THROWS_AS(TensorFile::decode(bytes.substr(0, bytes.size() - 9)), FormatError);
        CHECK_THROWS_AS(TensorFile::decode(bytes.substr(0, 10)), FormatError);
    }
    SUBCASE("payload corruption fails the checksum") {
        std::string b = bytes;
        b[b.size() - 12] ^= 0x01;
        CHECK_THROWS_WITH_AS(TensorFile::decode(b), doctest::Contains("crc"), FormatError);
    }
    SUBCASE("trailing bytes") { CHECK_THROWS_AS(TensorFile::decode(bytes + "x"), FormatError); }
    SUBCASE("manifest shape error names the tensor") {
        std::string b = bytes;
        const auto pos = b.find("alpha f64 2x3");
        REQUIRE(pos != std::string::npos);
        b.replace(pos, 13, "alpha f64 2y3");
        CHECK_THROWS_WITH_AS(TensorFile::decode(b), doctest::Contains("alpha"), FormatError);
    }
    SUBCASE("file round trip") {
        const fs::path p = scratch("t.pmnt");
        f.save(p);
        CHECK(TensorFile::load(p).encode() == bytes);
    }
}
