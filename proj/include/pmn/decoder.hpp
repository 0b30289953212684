#pragma once

#include <array>

#include "pmn/cmgm.hpp"
#include "pmn/image.hpp"

namespace pmn {

struct Conv3x3Params {
    Tensor kernel;  // C_out x C_in x 3 x 3
    Tensor bias;    // C_out

    std::size_t in_channels() const { return kernel.dim(1); }
    std::size_t out_channels() const { return kernel.dim(0); }
    void validate() const;
};

/// Light top-down decoder over the concatenated RGB and flow correlation maps.
///
/// Per level r: y_r = relu(conv3x3([tau_rgb_r ; tau_flow_r])). Then
/// t3 = y3, t2 = y2 + merge2(up(t3)), t1 = y1 + merge1(up(t2)), and the mask
/// is sigmoid(head(t1)) resized bilinearly to the image size.
struct DecoderWeights {
    std::array<Conv3x3Params, 3> convs;
    LinearParams merge2;  // D -> D
    LinearParams merge1;  // D -> D
    LinearParams head;    // D -> 1

    std::size_t width() const { return convs[0].out_channels(); }
    void validate() const;
};

/// Zero-padded, stride-1 cross-correlation.
Tensor conv3x3(const Tensor& x, const Conv3x3Params& params);

SegMask decode(const CorrelationMaps& tau_rgb, const CorrelationMaps& tau_flow, const DecoderWeights& weights,
               std::size_t height, std::size_t width);

}  // namespace pmn
