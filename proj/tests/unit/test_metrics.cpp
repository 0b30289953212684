#include <sstream>

#include "doctest.h"
#include "pmn/errors.hpp"
#include "pmn/metrics.hpp"
#include "support/oracles.hpp"

using namespace pmn;

namespace {

BinaryMask mask2x2(std::initializer_list<std::pair<std::size_t, std::size_t>> on) {
    BinaryMask m(2, 2);
    for (auto [y, x] : on) m.at(y, x) = 1;
    return m;
}

}  // namespace

TEST_CASE("region_j and f_measure on small cases") {
    const BinaryMask pred = mask2x2({{0, 0}, {0, 1}}), gt = mask2x2({{0, 1}, {1, 1}});
    CHECK(region_j(pred, gt) == doctest::Approx(1.0 / 3.0));
    CHECK(f_measure(pred, gt) == doctest::Approx(0.5));
    CHECK(region_j(pred, pred) == 1.0);
    CHECK(f_measure(pred, pred) == 1.0);
    const BinaryMask a = mask2x2({{0, 0}}), b = mask2x2({{1, 1}});
    CHECK(region_j(a, b) == 0.0);
    CHECK(f_measure(a, b) == 0.0);
    const BinaryMask none(2, 2);
    CHECK(region_j(none, none) == 1.0);
    CHECK(f_measure(none, none) == 1.0);
    CHECK(f_measure(none, gt) == 0.0);
    CHECK_THROWS_AS(region_j(BinaryMask(2, 3), gt), DimensionError);
}

TEST_CASE("iou_loss") {
    const BinaryMask gt = mask2x2({{0, 0}, {0, 1}});
    CHECK(iou_loss(to_soft(gt), gt) == 0.0);
    SegMask inverse = to_soft(gt);
    for (Real& v : inverse.values) v = 1.0 - v;
    CHECK(iou_loss(inverse, gt) == 1.0);
    const SegMask half{2, 2, {0.5, 0.5, 0.5, 0.5}};
    CHECK(iou_loss(half, gt) == doctest::Approx(oracle::iou_loss(half, gt)));
    CHECK(iou_loss(SegMask{2, 2, {0, 0, 0, 0}}, BinaryMask(2, 2)) == 0.0);

    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        SegMask p{3, 3, std::vector<Real>(9)};
        for (Real& v : p.values) v = rng.uniform();
        const BinaryMask g = oracle::mask3x3(static_cast<unsigned>(rng.below(512)));
        const Real l = iou_loss(p, g);
        CHECK(l >= 0.0);
        CHECK(l <= 1.0);
        CHECK(std::abs(l - oracle::iou_loss(p, g)) <= 1e-12);
    }
    for (unsigned code = 0; code < 512; code += 7) {
        const BinaryMask x = oracle::mask3x3(code), y = oracle::mask3x3((code * 37u + 11u) % 512u);
        CHECK(iou_loss(to_soft(x), y) == 1.0 - region_j(x, y));
        CHECK(iou_loss(to_soft(x), y) == iou_loss(to_soft(y), x));
    }
}

TEST_CASE("sequence_metrics and csv rows") {
    const BinaryMask pred = mask2x2({{0, 0}, {0, 1}}), gt = mask2x2({{0, 1}, {1, 1}});
    const MetricsRecord rec = sequence_metrics(std::vector<BinaryMask>{pred, gt}, std::vector<BinaryMask>{gt, gt});
    REQUIRE(rec.frames.size() == 2);
    CHECK(rec.j == doctest::Approx((1.0 / 3.0 + 1.0) / 2.0));
    CHECK(rec.f == doctest::Approx(0.75));
    CHECK(rec.jf == (rec.j + rec.f) / 2.0);

    const SegMask soft{2, 2, {0.6, 0.5, 0.2, 0.49}};
    const MetricsRecord s = sequence_metrics(std::vector<SegMask>{soft}, std::vector<BinaryMask>{gt});
    CHECK(s.j == doctest::Approx(1.0 / 3.0));

    std::ostringstream out;
    write_metrics_header(out);
    write_metrics_rows(out, "seq", rec);
    CHECK(out.str() ==
          "sequence,frame,J,F\nseq,0,0.333333,0.500000\nseq,1,1.000000,1.000000\nseq,mean,0.666667,0.750000\n");

    CHECK_THROWS_AS(sequence_metrics(std::vector<BinaryMask>{}, std::vector<BinaryMask>{}), ParameterError);
    CHECK_THROWS_AS(sequence_metrics(std::vector<BinaryMask>{pred}, std::vector<BinaryMask>{gt, gt}), ParameterError);
}
