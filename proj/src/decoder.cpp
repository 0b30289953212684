#include "pmn/decoder.hpp"

#include <algorithm>

#include "pmn/errors.hpp"

namespace pmn {

void Conv3x3Params::validate() const {
    if (kernel.rank() != 4 || kernel.dim(2) != 3 || kernel.dim(3) != 3) {
        throw ConfigError("conv3x3 kernel must be C_out x C_in x 3 x 3, got " + shape_string(kernel.shape()));
    }
    if (bias.rank() != 1 || bias.dim(0) != kernel.dim(0)) {
        throw ConfigError("conv3x3 bias " + shape_string(bias.shape()) + " does not match kernel " +
                          shape_string(kernel.shape()));
    }
}

void DecoderWeights::validate() const {
    const std::size_t d = width();
    for (const auto& c : convs) {
        c.validate();
        if (c.out_channels() != d || c.in_channels() != convs[0].in_channels()) {
            throw ConfigError("decoder convolutions must share shape " + shape_string(convs[0].kernel.shape()));
        }
    }
    for (const LinearParams* m : {&merge2, &merge1}) {
        m->validate();
        if (m->in_features() != d || m->out_features() != d) {
            throw ConfigError("decoder merge maps must be " + std::to_string(d) + "x" + std::to_string(d));
        }
    }
    head.validate();
    if (head.in_features() != d || head.out_features() != 1) {
        throw ConfigError("decoder head must map " + std::to_string(d) + " channels to 1");
    }
}

Tensor conv3x3(const Tensor& x, const Conv3x3Params& params) {
    params.validate();
    if (x.rank() != 3 || x.dim(0) != params.in_channels()) {
        throw DimensionError("conv3x3: input " + shape_string(x.shape()) + " for kernel " +
                             shape_string(params.kernel.shape()));
    }
    const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2), cout = params.out_channels();
    Tensor out = Tensor::volume(cout, h, w);
    for (std::size_t o = 0; o < cout; ++o) {
        auto dst = out.plane(o);
        std::fill(dst.begin(), dst.end(), params.bias[o]);
        for (std::size_t c = 0; c < cin; ++c) {
            const auto src = x.plane(c);
            const Real* k = params.kernel.data() + (o * cin + c) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const Real kv = k[ky * 3 + kx];
                    if (kv == 0.0) continue;
                    // output (y, x) reads input (y + ky - 1, x + kx - 1)
                    const std::size_t y0 = ky == 0 ? 1 : 0, y1 = ky == 2 ? h - 1 : h;
                    const std::size_t x0 = kx == 0 ? 1 : 0, x1 = kx == 2 ? w - 1 : w;
                    for (std::size_t y = y0; y < y1; ++y) {
                        const Real* s = src.data() + (y + static_cast<std::size_t>(ky) - 1) * w;
                        Real* d = dst.data() + y * w;
                        for (std::size_t xx = x0; xx < x1; ++xx) d[xx] += kv * s[xx + static_cast<std::size_t>(kx) - 1];
                    }
                }
            }
        }
    }
    return out;
}

SegMask decode(const CorrelationMaps& tau_rgb, const CorrelationMaps& tau_flow, const DecoderWeights& weights,
               std::size_t height, std::size_t width) {
    weights.validate();
    const std::size_t k = tau_rgb.channels();
    if (tau_flow.channels() != k || 2 * k != weights.convs[0].in_channels()) {
        throw ConfigError("decode: correlation channels rgb=" + std::to_string(k) +
                          " flow=" + std::to_string(tau_flow.channels()) + " but decoder expects " +
                          std::to_string(weights.convs[0].in_channels()) + " in total");
    }
    std::array<Tensor, 3> y;
    for (std::size_t r = 0; r < 3; ++r) {
        const Tensor& a = tau_rgb.levels[r];
        const Tensor& b = tau_flow.levels[r];
        if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
            throw ConfigError("decode: level " + std::to_string(r + 1) + " scales differ between streams: " +
                              shape_string(a.shape()) + " vs " + shape_string(b.shape()));
        }
        Tensor cat = Tensor::volume(2 * k, a.dim(1), a.dim(2));
        std::copy(a.values().begin(), a.values().end(), cat.values().begin());
        std::copy(b.values().begin(), b.values().end(), cat.values().begin() + static_cast<std::ptrdiff_t>(a.size()));
        y[r] = relu(conv3x3(cat, weights.convs[r]));
    }
    const Tensor up3 = bilinear_resize(y[2], y[1].dim(1), y[1].dim(2));
    const Tensor t2 = add(y[1], linear_map_pixels(up3, weights.merge2));
    const Tensor up2 = bilinear_resize(t2, y[0].dim(1), y[0].dim(2));
    const Tensor t1 = add(y[0], linear_map_pixels(up2, weights.merge1));
    const Tensor prob = sigmoid(linear_map_pixels(t1, weights.head));
    const Tensor full = bilinear_resize(prob, height, width);
    return SegMask{height, width, std::vector<Real>(full.values().begin(), full.values().end())};
}

}  // namespace pmn
