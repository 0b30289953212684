#include "pmn/weights.hpp"

#include <cmath>

#include "pmn/errors.hpp"
#include "pmn/rng.hpp"

namespace pmn {

namespace {

LinearParams make_linear(Rng& rng, std::size_t in, std::size_t out) {
    const Real a = std::sqrt(6.0 / static_cast<Real>(in + out));
    LinearParams p{Tensor::matrix(out, in), Tensor({out}, 0.0)};
    for (Real& v : p.weight.values()) v = rng.uniform(-a, a);
    return p;
}

LayerNormParams make_norm(std::size_t c) { return {Tensor({c}, 1.0), Tensor({c}, 0.0)}; }

Conv3x3Params make_conv(Rng& rng, std::size_t in, std::size_t out) {
    const Real a = std::sqrt(6.0 / static_cast<Real>(9 * (in + out)));
    Conv3x3Params p{Tensor({out, in, 3, 3}), Tensor({out}, 0.0)};
    for (Real& v : p.kernel.values()) v = rng.uniform(-a, a);
    return p;
}

StreamWeights make_stream(Rng& rng, const PipelineConfig& cfg) {
    const std::size_t c = cfg.model_width, hid = cfg.hidden_width();
    const std::size_t in[3] = {cfg.encoder.c1, cfg.encoder.c2, cfg.encoder.c3};
    StreamWeights s;
    s.pgm = {make_linear(rng, in[0], c), make_linear(rng, in[1], c), make_linear(rng, in[2], c)};
    if (cfg.scorer == Scorer::transformer) {
        PsmWeights p;
        p.norm1 = make_norm(c);
        p.attention = {make_linear(rng, c, c), make_linear(rng, c, c), make_linear(rng, c, c),
                       make_linear(rng, c, c), cfg.heads};
        p.norm2 = make_norm(c);
        p.mlp = {make_linear(rng, c, hid), make_linear(rng, hid, c)};
        s.transformer = std::move(p);
    } else {
        s.mlp_scorer = MlpScorerWeights{make_norm(c), {make_linear(rng, c, hid), make_linear(rng, hid, c)}};
    }
    s.cmgm = {make_linear(rng, in[0], c), make_linear(rng, in[1], c), make_linear(rng, in[2], c)};
    return s;
}

template <typename W, typename F>
void visit_linear(const std::string& name, W& p, F& fn) {
    fn(name + ".weight", p.weight);
    fn(name + ".bias", p.bias);
}

template <typename W, typename F>
void visit_norm(const std::string& name, W& p, F& fn) {
    fn(name + ".scale", p.scale);
    fn(name + ".shift", p.shift);
}

template <typename S, typename F>
void visit_stream(const std::string& s, S& w, F& fn) {
    visit_linear(s + ".pgm.level1", w.pgm.level1, fn);
    visit_linear(s + ".pgm.level2", w.pgm.level2, fn);
    visit_linear(s + ".pgm.level3", w.pgm.level3, fn);
    if (w.transformer) {
        auto& p = *w.transformer;
        visit_norm(s + ".psm.norm1", p.norm1, fn);
        visit_linear(s + ".psm.attn.query", p.attention.query, fn);
        visit_linear(s + ".psm.attn.key", p.attention.key, fn);
        visit_linear(s + ".psm.attn.value", p.attention.value, fn);
        visit_linear(s + ".psm.attn.output", p.attention.output, fn);
        visit_norm(s + ".psm.norm2", p.norm2, fn);
        visit_linear(s + ".psm.mlp.fc1", p.mlp.fc1, fn);
        visit_linear(s + ".psm.mlp.fc2", p.mlp.fc2, fn);
    }
    if (w.mlp_scorer) {
        auto& p = *w.mlp_scorer;
        visit_norm(s + ".mlp_scorer.norm", p.norm, fn);
        visit_linear(s + ".mlp_scorer.mlp.fc1", p.mlp.fc1, fn);
        visit_linear(s + ".mlp_scorer.mlp.fc2", p.mlp.fc2, fn);
    }
    visit_linear(s + ".cmgm.level1", w.cmgm.level1, fn);
    visit_linear(s + ".cmgm.level2", w.cmgm.level2, fn);
    visit_linear(s + ".cmgm.level3", w.cmgm.level3, fn);
}

template <typename M, typename F>
void visit_model(M& w, F& fn) {
    visit_stream("rgb", w.rgb, fn);
    if (w.flow) visit_stream("flow", *w.flow, fn);
    for (std::size_t r = 0; r < 3; ++r) {
        fn("decoder.conv" + std::to_string(r + 1) + ".kernel", w.decoder.convs[r].kernel);
        fn("decoder.conv" + std::to_string(r + 1) + ".bias", w.decoder.convs[r].bias);
    }
    visit_linear("decoder.merge2", w.decoder.merge2, fn);
    visit_linear("decoder.merge1", w.decoder.merge1, fn);
    visit_linear("decoder.head", w.decoder.head, fn);
}

void expect_linear(const LinearParams& p, std::size_t in, std::size_t out, const std::string& name) {
    p.validate();
    if (p.in_features() != in || p.out_features() != out) {
        throw ConfigError("weights: " + name + " is " + shape_string(p.weight.shape()) + ", config needs " +
                          std::to_string(out) + "x" + std::to_string(in));
    }
}

void check_stream(const StreamWeights& s, const PipelineConfig& cfg, const std::string& name) {
    const std::size_t c = cfg.model_width;
    const std::size_t in[3] = {cfg.encoder.c1, cfg.encoder.c2, cfg.encoder.c3};
    for (std::size_t r = 0; r < 3; ++r) {
        expect_linear(s.pgm.level(r), in[r], c, name + ".pgm.level" + std::to_string(r + 1));
        expect_linear(s.cmgm.level(r), in[r], c, name + ".cmgm.level" + std::to_string(r + 1));
    }
    if (cfg.scorer == Scorer::transformer) {
        if (!s.transformer) throw ConfigError("weights: " + name + " has no transformer scorer");
        s.transformer->validate();
        if (s.transformer->width() != c) throw ConfigError("weights: " + name + ".psm width differs from model.width");
    } else {
        if (!s.mlp_scorer) throw ConfigError("weights: " + name + " has no mlp scorer");
        s.mlp_scorer->validate();
        if (s.mlp_scorer->width() != c) throw ConfigError("weights: " + name + ".mlp_scorer width differs from model.width");
    }
}

}  // namespace

ModelWeights init_weights(const PipelineConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    ModelWeights w;
    w.rgb = make_stream(rng, config);
    if (!config.tie_streams) w.flow = make_stream(rng, config);
    const std::size_t d = config.decoder_width, k2 = 2 * config.channel_budget();
    for (auto& conv : w.decoder.convs) conv = make_conv(rng, k2, d);
    w.decoder.merge2 = make_linear(rng, d, d);
    w.decoder.merge1 = make_linear(rng, d, d);
    w.decoder.head = make_linear(rng, d, 1);
    return w;
}

void visit_parameters(ModelWeights& weights, const std::function<void(const std::string&, Tensor&)>& fn) {
    visit_model(weights, fn);
}

void visit_parameters(const ModelWeights& weights,
                      const std::function<void(const std::string&, const Tensor&)>& fn) {
    visit_model(weights, fn);
}

std::size_t parameter_count(const ModelWeights& weights) {
    std::size_t n = 0;
    visit_parameters(weights, [&](const std::string&, const Tensor& t) { n += t.size(); });
    return n;
}

TensorFile weights_to_tensors(const ModelWeights& weights) {
    TensorFile file;
    const std::size_t heads = weights.rgb.transformer ? weights.rgb.transformer->attention.heads : 1;
    file.add("meta.heads", Tensor({1}, static_cast<Real>(heads)));
    visit_parameters(weights, [&](const std::string& name, const Tensor& t) { file.add(name, t); });
    return file;
}

ModelWeights weights_from_tensors(const TensorFile& file) {
    ModelWeights w;
    const auto heads = static_cast<std::size_t>(file.get("meta.heads")[0]);
    auto skeleton = [&](const std::string& s) {
        StreamWeights sw;
        if (file.contains(s + ".psm.norm1.scale")) {
            sw.transformer = PsmWeights{};
            sw.transformer->attention.heads = heads;
        }
        if (file.contains(s + ".mlp_scorer.norm.scale")) sw.mlp_scorer = MlpScorerWeights{};
        return sw;
    };
    w.rgb = skeleton("rgb");
    if (file.contains("flow.pgm.level1.weight")) w.flow = skeleton("flow");
    visit_parameters(w, [&](const std::string& name, Tensor& t) { t = file.get(name); });
    return w;
}

void check_weights(const ModelWeights& weights, const PipelineConfig& config) {
    check_stream(weights.rgb, config, "rgb");
    if (weights.flow) check_stream(*weights.flow, config, "flow");
    weights.decoder.validate();
    if (weights.decoder.convs[0].in_channels() != 2 * config.channel_budget()) {
        throw ConfigError("weights: decoder expects " + std::to_string(weights.decoder.convs[0].in_channels()) +
                          " correlation channels, config budget gives " +
                          std::to_string(2 * config.channel_budget()));
    }
}

}  // namespace pmn
