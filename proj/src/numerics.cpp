#include "pmn/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "pmn/errors.hpp"

namespace pmn {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
    if (t.rank() != rank) {
        throw DimensionError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                             shape_string(t.shape()));
    }
}

template <typename F>
Tensor map_values(Tensor x, F f) {
    for (Real& v : x.values()) v = f(v);
    return x;
}

}  // namespace

void LinearParams::validate() const {
    if (weight.rank() != 2 || bias.rank() != 1) {
        throw ConfigError("linear map needs a 2-d weight and 1-d bias, got " + shape_string(weight.shape()) +
                          " and " + shape_string(bias.shape()));
    }
    if (weight.dim(0) != bias.dim(0)) {
        throw ConfigError("linear map weight rows " + std::to_string(weight.dim(0)) + " != bias length " +
                          std::to_string(bias.dim(0)));
    }
}

void LayerNormParams::validate() const {
    if (scale.rank() != 1 || shift.rank() != 1 || scale.size() != shift.size()) {
        throw ConfigError("layer norm scale " + shape_string(scale.shape()) + " and shift " +
                          shape_string(shift.shape()) + " must be equal-length vectors");
    }
}

void MlpParams::validate() const {
    fc1.validate();
    fc2.validate();
    if (fc1.out_features() != fc2.in_features()) {
        throw ConfigError("mlp hidden width mismatch: " + std::to_string(fc1.out_features()) + " vs " +
                          std::to_string(fc2.in_features()));
    }
}

void AttentionParams::validate() const {
    for (const LinearParams* p : {&query, &key, &value, &output}) {
        p->validate();
        if (p->in_features() != width() || p->out_features() != width()) {
            throw ConfigError("attention projections must all be " + std::to_string(width()) + "x" +
                              std::to_string(width()) + ", got " + shape_string(p->weight.shape()));
        }
    }
    if (heads == 0 || width() % heads != 0) {
        throw ConfigError("attention width " + std::to_string(width()) + " is not divisible by " +
                          std::to_string(heads) + " heads");
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    if (a.dim(1) != b.dim(0)) {
        throw DimensionError("matmul inner dimensions disagree: " + shape_string(a.shape()) + " x " +
                             shape_string(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out = Tensor::matrix(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        Real* dst = out.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const Real s = a(i, p);
            const Real* src = b.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) dst[j] += s * src[j];
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    require_rank(a, 2, "transpose");
    Tensor out = Tensor::matrix(a.dim(1), a.dim(0));
    for (std::size_t i = 0; i < a.dim(0); ++i)
        for (std::size_t j = 0; j < a.dim(1); ++j) out(j, i) = a(i, j);
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError("add: shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()) +
                             " differ");
    }
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

Tensor softmax_rows(const Tensor& x) {
    require_rank(x, 2, "softmax_rows");
    Tensor out = x;
    for (std::size_t i = 0; i < out.dim(0); ++i) {
        auto r = out.row(i);
        const Real mx = *std::max_element(r.begin(), r.end());
        Real sum = 0.0;
        for (Real& v : r) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (Real& v : r) v /= sum;
    }
    return out;
}

Tensor layer_norm(const Tensor& x, const LayerNormParams& p, Real eps) {
    require_rank(x, 2, "layer_norm");
    p.validate();
    const std::size_t c = x.dim(1);
    if (p.width() != c) {
        throw DimensionError("layer_norm: parameters of width " + std::to_string(p.width()) +
                             " applied to rows of width " + std::to_string(c));
    }
    Tensor out = x;
    for (std::size_t i = 0; i < x.dim(0); ++i) {
        auto r = out.row(i);
        Real mean = 0.0;
        for (Real v : r) mean += v;
        mean /= static_cast<Real>(c);
        Real var = 0.0;
        for (Real v : r) var += (v - mean) * (v - mean);
        var /= static_cast<Real>(c);
        const Real inv = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < c; ++j) r[j] = (r[j] - mean) * inv * p.scale[j] + p.shift[j];
    }
    return out;
}

Tensor multi_head_attention(const Tensor& x, const AttentionParams& p) {
    require_rank(x, 2, "multi_head_attention");
    p.validate();
    const std::size_t m = x.dim(0), c = x.dim(1);
    if (c != p.width()) {
        throw ConfigError("multi_head_attention: input width " + std::to_string(c) + " but parameters expect " +
                          std::to_string(p.width()));
    }
    const Tensor q = linear_map(x, p.query);
    const Tensor k = linear_map(x, p.key);
    const Tensor v = linear_map(x, p.value);
    const std::size_t dh = c / p.heads;
    const Real scale = 1.0 / std::sqrt(static_cast<Real>(dh));

    Tensor concat = Tensor::matrix(m, c);
    Tensor scores = Tensor::matrix(m, m);
    for (std::size_t h = 0; h < p.heads; ++h) {
        const std::size_t off = h * dh;
        for (std::size_t i = 0; i < m; ++i) {
            const Real* qi = q.data() + i * c + off;
            for (std::size_t j = 0; j < m; ++j) {
                const Real* kj = k.data() + j * c + off;
                Real s = 0.0;
                for (std::size_t d = 0; d < dh; ++d) s += qi[d] * kj[d];
                scores(i, j) = s * scale;
            }
        }
        const Tensor attn = softmax_rows(scores);
        for (std::size_t i = 0; i < m; ++i) {
            Real* ci = concat.data() + i * c + off;
            for (std::size_t j = 0; j < m; ++j) {
                const Real a = attn(i, j);
                const Real* vj = v.data() + j * c + off;
                for (std::size_t d = 0; d < dh; ++d) ci[d] += a * vj[d];
            }
        }
    }
    return linear_map(concat, p.output);
}

Tensor bilinear_resize(const Tensor& x, std::size_t out_h, std::size_t out_w) {
    require_rank(x, 3, "bilinear_resize");
    if (out_h == 0 || out_w == 0) {
        throw DimensionError("bilinear_resize: target size " + std::to_string(out_h) + "x" +
                             std::to_string(out_w) + " must be positive");
    }
    const std::size_t ch = x.dim(0), in_h = x.dim(1), in_w = x.dim(2);
    if (in_h == out_h && in_w == out_w) return x;

    struct Tap {
        std::size_t i0, i1;
        Real w1;
    };
    auto taps = [](std::size_t in, std::size_t out) {
        std::vector<Tap> t(out);
        const Real ratio = static_cast<Real>(in) / static_cast<Real>(out);
        for (std::size_t o = 0; o < out; ++o) {
            Real src = (static_cast<Real>(o) + 0.5) * ratio - 0.5;
            src = std::clamp(src, 0.0, static_cast<Real>(in - 1));
            const auto i0 = static_cast<std::size_t>(std::floor(src));
            const std::size_t i1 = std::min(i0 + 1, in - 1);
            t[o] = {i0, i1, src - static_cast<Real>(i0)};
        }
        return t;
    };
    const auto ty = taps(in_h, out_h);
    const auto tx = taps(in_w, out_w);

    Tensor out = Tensor::volume(ch, out_h, out_w);
    for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            const Tap& a = ty[oy];
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                const Tap& b = tx[ox];
                const Real top = x(c, a.i0, b.i0) * (1.0 - b.w1) + x(c, a.i0, b.i1) * b.w1;
                const Real bot = x(c, a.i1, b.i0) * (1.0 - b.w1) + x(c, a.i1, b.i1) * b.w1;
                out(c, oy, ox) = top * (1.0 - a.w1) + bot * a.w1;
            }
        }
    }
    return out;
}

Real cosine_similarity(std::span<const Real> u, std::span<const Real> v) {
    if (u.size() != v.size()) {
        throw DimensionError("cosine_similarity: lengths " + std::to_string(u.size()) + " and " +
                             std::to_string(v.size()) + " differ");
    }
    Real dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu < kCosineNormFloor || nv < kCosineNormFloor) return 0.0;
    return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

Real sigmoid(Real x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const Real e = std::exp(x);
    return e / (1.0 + e);
}

Real relu(Real x) { return x > 0 ? x : 0.0; }

Real gelu(Real x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

Tensor sigmoid(Tensor x) { return map_values(std::move(x), [](Real v) { return sigmoid(v); }); }
Tensor relu(Tensor x) { return map_values(std::move(x), [](Real v) { return relu(v); }); }
Tensor gelu(Tensor x) { return map_values(std::move(x), [](Real v) { return gelu(v); }); }

Tensor linear_map(const Tensor& x, const LinearParams& p) {
    require_rank(x, 2, "linear_map");
    p.validate();
    const std::size_t m = x.dim(0), in = p.in_features(), out_f = p.out_features();
    if (x.dim(1) != in) {
        throw ConfigError("linear_map: rows of width " + std::to_string(x.dim(1)) + " but weight is " +
                          shape_string(p.weight.shape()));
    }
    Tensor out = Tensor::matrix(m, out_f);
    for (std::size_t i = 0; i < m; ++i) {
        const Real* xr = x.data() + i * in;
        for (std::size_t o = 0; o < out_f; ++o) {
            const Real* wr = p.weight.data() + o * in;
            Real s = p.bias[o];
            for (std::size_t j = 0; j < in; ++j) s += wr[j] * xr[j];
            out(i, o) = s;
        }
    }
    return out;
}

Tensor linear_map_pixels(const Tensor& x, const LinearParams& p) {
    require_rank(x, 3, "linear_map_pixels");
    p.validate();
    const std::size_t in = x.dim(0), h = x.dim(1), w = x.dim(2), n = h * w;
    if (in != p.in_features()) {
        throw ConfigError("1x1 projection expects " + std::to_string(p.in_features()) + " channels, volume has " +
                          std::to_string(in) + " (" + shape_string(x.shape()) + ")");
    }
    Tensor out = Tensor::volume(p.out_features(), h, w);
    for (std::size_t o = 0; o < p.out_features(); ++o) {
        Real* dst = out.data() + o * n;
        std::fill(dst, dst + n, p.bias[o]);
        for (std::size_t c = 0; c < in; ++c) {
            const Real wv = p.weight(o, c);
            if (wv == 0.0) continue;
            const Real* src = x.data() + c * n;
            for (std::size_t i = 0; i < n; ++i) dst[i] += wv * src[i];
        }
    }
    return out;
}

Tensor mlp_forward(const Tensor& x, const MlpParams& p) {
    return linear_map(gelu(linear_map(x, p.fc1)), p.fc2);
}

}  // namespace pmn
