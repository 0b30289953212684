#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pmn/image.hpp"

namespace pmn {

struct FrameScore {
    Real j = 0.0;
    Real f = 0.0;
};

struct MetricsRecord {
    std::vector<FrameScore> frames;
    Real j = 0.0;
    Real f = 0.0;
    Real jf = 0.0;
};

/// 1 - sum(min(pred, gt)) / sum(max(pred, gt)); 0 when both are all zero.
Real iou_loss(const SegMask& pred, const BinaryMask& gt);

/// Region similarity |P & G| / |P | G|; 1 when both are empty.
Real region_j(const BinaryMask& pred, const BinaryMask& gt);

/// 2PR / (P + R) with region precision |P & G| / |P| and recall |P & G| / |G|.
/// 1 when both are empty, 0 when P + R = 0.
Real f_measure(const BinaryMask& pred, const BinaryMask& gt);

MetricsRecord sequence_metrics(const std::vector<BinaryMask>& preds, const std::vector<BinaryMask>& gts);

/// Soft masks are binarized at 0.5 first.
MetricsRecord sequence_metrics(const std::vector<SegMask>& preds, const std::vector<BinaryMask>& gts);

/// Columns: sequence,frame,J,F. Frames are numbered from 0; the summary row
/// carries "mean" in the frame column.
void write_metrics_header(std::ostream& out);
void write_metrics_rows(std::ostream& out, const std::string& sequence, const MetricsRecord& record);

}  // namespace pmn
