#include "pmn/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "pmn/errors.hpp"

namespace pmn {

namespace {

template <typename A, typename B>
void check_same(const A& a, const B& b, const char* who) {
    if (a.height != b.height || a.width != b.width) {
        throw DimensionError(std::string(who) + ": " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                             " vs " + std::to_string(b.height) + "x" + std::to_string(b.width));
    }
}

struct Counts {
    std::size_t inter = 0, uni = 0, pred = 0, gt = 0;
};

Counts count(const BinaryMask& pred, const BinaryMask& gt) {
    Counts c;
    for (std::size_t i = 0; i < pred.bits.size(); ++i) {
        const bool p = pred.bits[i] != 0, g = gt.bits[i] != 0;
        c.inter += p && g;
        c.uni += p || g;
        c.pred += p;
        c.gt += g;
    }
    return c;
}

std::string fmt(Real v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

Real iou_loss(const SegMask& pred, const BinaryMask& gt) {
    check_same(pred, gt, "iou_loss");
    Real num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const Real g = gt.bits[i] ? 1.0 : 0.0;
        num += std::min(pred.values[i], g);
        den += std::max(pred.values[i], g);
    }
    if (den == 0.0) return 0.0;
    return 1.0 - num / den;
}

Real region_j(const BinaryMask& pred, const BinaryMask& gt) {
    check_same(pred, gt, "region_j");
    const Counts c = count(pred, gt);
    if (c.uni == 0) return 1.0;
    return static_cast<Real>(c.inter) / static_cast<Real>(c.uni);
}

Real f_measure(const BinaryMask& pred, const BinaryMask& gt) {
    check_same(pred, gt, "f_measure");
    const Counts c = count(pred, gt);
    if (c.pred == 0 && c.gt == 0) return 1.0;
    const Real precision = c.pred ? static_cast<Real>(c.inter) / static_cast<Real>(c.pred) : 0.0;
    const Real recall = c.gt ? static_cast<Real>(c.inter) / static_cast<Real>(c.gt) : 0.0;
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

MetricsRecord sequence_metrics(const std::vector<BinaryMask>& preds, const std::vector<BinaryMask>& gts) {
    if (preds.empty()) throw ParameterError("sequence_metrics: no frames");
    if (preds.size() != gts.size()) {
        throw ParameterError("sequence_metrics: " + std::to_string(preds.size()) + " predictions for " +
                             std::to_string(gts.size()) + " ground-truth masks");
    }
    MetricsRecord rec;
    for (std::size_t t = 0; t < preds.size(); ++t) {
        rec.frames.push_back({region_j(preds[t], gts[t]), f_measure(preds[t], gts[t])});
        rec.j += rec.frames.back().j;
        rec.f += rec.frames.back().f;
    }
    rec.j /= static_cast<Real>(preds.size());
    rec.f /= static_cast<Real>(preds.size());
    rec.jf = (rec.j + rec.f) / 2.0;
    return rec;
}

MetricsRecord sequence_metrics(const std::vector<SegMask>& preds, const std::vector<BinaryMask>& gts) {
    std::vector<BinaryMask> bin;
    bin.reserve(preds.size());
    for (const auto& p : preds) bin.push_back(p.binarize(0.5));
    return sequence_metrics(bin, gts);
}

void write_metrics_header(std::ostream& out) { out << "sequence,frame,J,F\n"; }

void write_metrics_rows(std::ostream& out, const std::string& sequence, const MetricsRecord& record) {
    for (std::size_t t = 0; t < record.frames.size(); ++t) {
        out << sequence << "," << t << "," << fmt(record.frames[t].j) << "," << fmt(record.frames[t].f) << "\n";
    }
    out << sequence << ",mean," << fmt(record.j) << "," << fmt(record.f) << "\n";
}

}  // namespace pmn
