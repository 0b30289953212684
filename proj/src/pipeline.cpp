#include "pmn/pipeline.hpp"

#include <algorithm>
#include <numeric>

#include "pmn/errors.hpp"
#include "pmn/pgm.hpp"

namespace pmn {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

template <typename E>
[[noreturn]] void rethrow_as(const E&, const std::string& context, const std::exception& e) {
    throw E(context + e.what());
}

// Prepends context to a library error while keeping its type.
template <typename F>
auto with_context(const std::string& context, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const DimensionError& e) {
        rethrow_as(e, context, e);
    } catch (const ConfigError& e) {
        rethrow_as(e, context, e);
    } catch (const ParameterError& e) {
        rethrow_as(e, context, e);
    } catch (const FormatError& e) {
        rethrow_as(e, context, e);
    } catch (const NumericalError& e) {
        rethrow_as(e, context, e);
    } catch (const InvariantError& e) {
        rethrow_as(e, context, e);
    } catch (const Error& e) {
        rethrow_as(e, context, e);
    }
}

std::string context_for(std::size_t frame, Stream s) {
    return "frame " + std::to_string(frame) + ", " + std::string(stream_name(s)) + " stream: ";
}

ScoreResult score(const PrototypeBlock& block, const StreamWeights& w, const PipelineConfig& config) {
    const ScoringOptions options{config.residuals};
    if (config.scorer == Scorer::transformer) {
        if (!w.transformer) throw ConfigError("transformer scorer selected but its weights are missing");
        return score_block(block, *w.transformer, options);
    }
    if (!w.mlp_scorer) throw ConfigError("mlp scorer selected but its weights are missing");
    return score_block_mlp(block, *w.mlp_scorer, options);
}

}  // namespace

SuperpixelMap sample_superpixels(const Image& image, Stream stream, std::size_t frame,
                                 const PipelineConfig& config) {
    switch (config.sampler) {
        case Sampler::superpixel: {
            SlicOptions options;
            options.n_segments = config.n_segments;
            options.compactness = config.compactness;
            options.iterations = config.slic_iterations;
            options.seed = config.seed;
            options.threads = config.threads;
            return slic_segment(image, options);
        }
        case Sampler::grid:
            return grid_masks(image.height, image.width, config.n_segments);
        case Sampler::random: {
            const std::uint64_t seed =
                splitmix(splitmix(config.seed) ^ (2 * static_cast<std::uint64_t>(frame) + static_cast<std::uint64_t>(stream)));
            return random_masks(image.height, image.width, config.n_segments, seed);
        }
    }
    throw ConfigError("unknown sampler");
}

std::vector<Image> resolve_flow(const std::vector<Frame>& frames) {
    std::vector<Image> flows;
    flows.reserve(frames.size());
    for (const Frame& f : frames) {
        if (f.flow) flows.push_back(*f.flow);
        else if (!flows.empty()) flows.push_back(flows.back());
        else flows.emplace_back(f.rgb.height, f.rgb.width, 0.5);
    }
    return flows;
}

std::vector<PreparedFrame> prepare_sequence(const std::vector<Frame>& frames, const PipelineConfig& config,
                                            const FeatureExtractor& extractor) {
    config.validate();
    if (frames.empty()) throw ParameterError("sequence has no frames");
    const std::vector<Image> flows = resolve_flow(frames);
    const std::size_t fh = config.height / 8, fw = config.width / 8;

    std::vector<PreparedFrame> out;
    out.reserve(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
        PreparedFrame pf;
        pf.index = t;
        pf.gt = frames[t].gt;
        for (Stream s : {Stream::rgb, Stream::flow}) {
            const Image& image = s == Stream::rgb ? frames[t].rgb : flows[t];
            pf.streams[static_cast<std::size_t>(s)] = with_context(context_for(t, s), [&] {
                if (image.height != config.height || image.width != config.width) {
                    throw DimensionError("image is " + std::to_string(image.height) + "x" +
                                         std::to_string(image.width) + ", config expects " +
                                         std::to_string(config.height) + "x" + std::to_string(config.width));
                }
                PreparedStream ps;
                ps.superpixels = sample_superpixels(image, s, t, config);
                ps.masks = downsample_masks(ps.superpixels, fh, fw, s);
                ps.features = extractor(image, s, t);
                ps.features.validate();
                if (ps.features.image_height() != config.height || ps.features.image_width() != config.width) {
                    throw DimensionError("feature pyramid does not match the image size");
                }
                return ps;
            });
        }
        if (pf.gt && (pf.gt->height != config.height || pf.gt->width != config.width)) {
            throw DimensionError("frame " + std::to_string(t) + ": ground truth size differs from the image");
        }
        out.push_back(std::move(pf));
    }
    return out;
}

SequenceState SequenceState::start(const std::string& sequence) {
    return {MemoryBank(sequence, Stream::rgb), MemoryBank(sequence, Stream::flow)};
}

FrameResult process_frame(const SequenceState& state, const PreparedFrame& frame, const ModelWeights& weights,
                          const PipelineConfig& config) {
    FrameResult result{{}, state, {}};
    std::array<CorrelationMaps, 2> tau;
    for (Stream s : {Stream::rgb, Stream::flow}) {
        const auto si = static_cast<std::size_t>(s);
        with_context(context_for(frame.index, s), [&] {
            const StreamWeights& w = weights.stream(s);
            const PreparedStream& ps = frame.stream(s);
            const MemoryBank& bank = state.bank(s);
            if (bank.stream() != s) throw InvariantError("memory bank belongs to the other stream");

            const Tensor fused = fuse_pyramid(ps.features, w.pgm);
            PrototypeSet fresh = generate_prototypes(fused, ps.masks);
            fresh.origin = s;
            const PrototypeBlock block = build_block(fresh, bank);
            const ScoreResult scored = score(block, w, config);
            const Tensor sampled = sample_block(block, scored.upsilon);
            const Tensor& kept = config.store_raw ? block.rows : sampled;

            MemoryBank selected;
            if (config.memory_enabled()) {
                result.state.bank(s) = update_memory(bank, kept, scored.upsilon, config.memory_size);
                selected = result.state.bank(s);
            } else {
                selected = update_memory(reset_memory(bank), kept, scored.upsilon, config.channel_budget());
            }
            const ProjectedFeatures projected = project_features(ps.features, w.cmgm);
            tau[si] = correlation_maps(projected, selected, config.channel_budget());

            StreamTrace& trace = result.streams[si];
            trace.prototypes = fresh.count();
            trace.block_rows = block.size();
            trace.upsilon = scored.upsilon;
            trace.bank_size = result.state.bank(s).size();
            trace.tau = tau[si];
        });
    }
    result.mask = with_context("frame " + std::to_string(frame.index) + ", decoder: ", [&] {
        return decode(tau[0], tau[1], weights.decoder, config.height, config.width);
    });
    return result;
}

SequenceResult run_prepared(const std::string& sequence, const std::vector<PreparedFrame>& frames,
                            const ModelWeights& weights, const PipelineConfig& config) {
    config.validate();
    if (frames.empty()) throw ParameterError("sequence '" + sequence + "' has no frames");
    check_weights(weights, config);

    SequenceResult out;
    SequenceState state = SequenceState::start(sequence);
    bool all_gt = true;
    for (const PreparedFrame& f : frames) {
        FrameResult r = process_frame(state, f, weights, config);
        for (Stream s : {Stream::rgb, Stream::flow}) {
            const StreamTrace& t = r.streams[static_cast<std::size_t>(s)];
            const auto [lo, hi] = std::minmax_element(t.upsilon.begin(), t.upsilon.end());
            const Real mean = std::accumulate(t.upsilon.begin(), t.upsilon.end(), 0.0) /
                              static_cast<Real>(t.upsilon.size());
            out.log.push_back({f.index, s, t.block_rows, *lo, mean, *hi, t.bank_size});
        }
        out.masks.push_back(std::move(r.mask));
        state = std::move(r.state);
        all_gt = all_gt && f.gt.has_value();
    }
    if (all_gt) {
        std::vector<BinaryMask> gts;
        for (const PreparedFrame& f : frames) gts.push_back(*f.gt);
        out.metrics = sequence_metrics(out.masks, gts);
    }
    return out;
}

SequenceResult run_sequence(const std::string& sequence, const std::vector<Frame>& frames,
                            const ModelWeights& weights, const PipelineConfig& config,
                            const FeatureExtractor& extractor) {
    if (frames.empty()) throw ParameterError("sequence '" + sequence + "' has no frames");
    return run_prepared(sequence, prepare_sequence(frames, config, extractor), weights, config);
}

Real sequence_loss(const std::vector<PreparedFrame>& frames, const ModelWeights& weights,
                   const PipelineConfig& config) {
    config.validate();
    if (frames.empty()) throw ParameterError("sequence_loss: no frames");
    check_weights(weights, config);
    SequenceState state = SequenceState::start("loss");
    Real total = 0.0;
    for (const PreparedFrame& f : frames) {
        if (!f.gt) throw ParameterError("sequence_loss: frame " + std::to_string(f.index) + " has no ground truth");
        FrameResult r = process_frame(state, f, weights, config);
        total += iou_loss(r.mask, *f.gt);
        state = std::move(r.state);
    }
    return total / static_cast<Real>(frames.size());
}

std::vector<SweepRow> sweep_k(const std::string& sequence, const std::vector<PreparedFrame>& frames,
                              const ModelWeights& weights, const PipelineConfig& config,
                              std::vector<std::size_t> k_values) {
    std::sort(k_values.begin(), k_values.end());
    k_values.erase(std::unique(k_values.begin(), k_values.end()), k_values.end());
    PipelineConfig base = config;
    base.correlation_channels = config.channel_budget();

    std::vector<SweepRow> rows;
    for (std::size_t k : k_values) {
        PipelineConfig c = base;
        c.memory_size = k;
        SequenceResult r = run_prepared(sequence, frames, weights, c);
        if (!r.metrics) throw ParameterError("sweep_k: sequence '" + sequence + "' lacks ground truth");
        rows.push_back({k, std::move(*r.metrics)});
    }
    return rows;
}

}  // namespace pmn
