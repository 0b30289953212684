#pragma once

#include <span>

#include "pmn/tensor.hpp"

namespace pmn {

/// Per-row affine map y = W x + b. A 1x1 convolution over a C x h x w volume
/// is the same map applied at every pixel.
struct LinearParams {
    Tensor weight;  // out x in
    Tensor bias;    // out

    std::size_t in_features() const { return weight.dim(1); }
    std::size_t out_features() const { return weight.dim(0); }
    void validate() const;
};

struct LayerNormParams {
    Tensor scale;  // C
    Tensor shift;  // C

    std::size_t width() const { return scale.size(); }
    void validate() const;
};

/// Two linear maps with a GELU in between.
struct MlpParams {
    LinearParams fc1;
    LinearParams fc2;

    void validate() const;
};

/// Multi-head self-attention. Each of query/key/value is a C x C map whose
/// output rows are split into `heads` contiguous blocks of C / heads.
struct AttentionParams {
    LinearParams query;
    LinearParams key;
    LinearParams value;
    LinearParams output;
    std::size_t heads = 1;

    std::size_t width() const { return query.in_features(); }
    void validate() const;
};

inline constexpr Real kLayerNormEps = 1e-5;
inline constexpr Real kCosineNormFloor = 1e-12;

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);

/// Row-wise softmax, computed after subtracting the row maximum.
Tensor softmax_rows(const Tensor& x);

Tensor layer_norm(const Tensor& x, const LayerNormParams& p, Real eps = kLayerNormEps);

/// Scaled dot-product self-attention with 1/sqrt(head_dim) scaling, no
/// positional encoding and no dropout.
Tensor multi_head_attention(const Tensor& x, const AttentionParams& p);

/// Bilinear interpolation with the align-corners-false convention
/// (source = (dst + 0.5) * in / out - 0.5, clamped at the border).
Tensor bilinear_resize(const Tensor& x, std::size_t out_h, std::size_t out_w);

/// Cosine of the angle between u and v; 0 when either norm is below 1e-12.
Real cosine_similarity(std::span<const Real> u, std::span<const Real> v);

Real sigmoid(Real x);
Real relu(Real x);
Real gelu(Real x);
Tensor sigmoid(Tensor x);
Tensor relu(Tensor x);
Tensor gelu(Tensor x);

/// x: m x in -> m x out.
Tensor linear_map(const Tensor& x, const LinearParams& p);

/// x: C_in x h x w -> C_out x h x w (1x1 convolution).
Tensor linear_map_pixels(const Tensor& x, const LinearParams& p);

Tensor mlp_forward(const Tensor& x, const MlpParams& p);

}  // namespace pmn
