#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pmn/cmgm.hpp"
#include "pmn/config.hpp"
#include "pmn/encoder.hpp"
#include "pmn/metrics.hpp"
#include "pmn/psm.hpp"
#include "pmn/slic.hpp"
#include "pmn/weights.hpp"

namespace pmn {

/// Input frame. `flow` encodes motion from this frame to the next; when it is
/// missing the previous frame's flow is reused (mid-gray for a first frame).
struct Frame {
    Image rgb;
    std::optional<Image> flow;
    std::optional<BinaryMask> gt;
};

/// Everything about one stream of one frame that does not depend on weights.
struct PreparedStream {
    SuperpixelMap superpixels;
    MaskStack masks;  // at H/8
    FeaturePyramid features;
};

struct PreparedFrame {
    std::size_t index = 0;
    std::array<PreparedStream, 2> streams;
    std::optional<BinaryMask> gt;

    const PreparedStream& stream(Stream s) const { return streams[static_cast<std::size_t>(s)]; }
};

/// Sampler output for one stream image: SLIC, grid tiling or random Voronoi
/// (seeded from the config seed, frame index and stream).
SuperpixelMap sample_superpixels(const Image& image, Stream stream, std::size_t frame, const PipelineConfig& config);

/// Flow images with the missing-flow fallback applied.
std::vector<Image> resolve_flow(const std::vector<Frame>& frames);

std::vector<PreparedFrame> prepare_sequence(const std::vector<Frame>& frames, const PipelineConfig& config,
                                            const FeatureExtractor& extractor);

/// The two per-stream memory banks of one sequence.
struct SequenceState {
    MemoryBank rgb;
    MemoryBank flow;

    static SequenceState start(const std::string& sequence);
    const std::string& sequence() const { return rgb.sequence(); }
    const MemoryBank& bank(Stream s) const { return s == Stream::flow ? flow : rgb; }
    MemoryBank& bank(Stream s) { return s == Stream::flow ? flow : rgb; }

    friend bool operator==(const SequenceState&, const SequenceState&) = default;
};

struct StreamTrace {
    std::size_t prototypes = 0;  // N'
    std::size_t block_rows = 0;  // N' + K'
    std::vector<Real> upsilon;
    std::size_t bank_size = 0;  // after the update
    CorrelationMaps tau;
};

struct FrameResult {
    SegMask mask;
    SequenceState state;
    std::array<StreamTrace, 2> streams;
};

/// One step of the per-sequence fold. Errors from any stage are rethrown with
/// the frame index and stream name prepended, keeping their type.
FrameResult process_frame(const SequenceState& state, const PreparedFrame& frame, const ModelWeights& weights,
                          const PipelineConfig& config);

/// Per-frame, per-stream summary of the sampling vector.
struct UpsilonStats {
    std::size_t frame = 0;
    Stream stream = Stream::rgb;
    std::size_t rows = 0;
    Real min = 0.0;
    Real mean = 0.0;
    Real max = 0.0;
    std::size_t bank_size = 0;
};

struct SequenceResult {
    std::vector<SegMask> masks;
    std::optional<MetricsRecord> metrics;  // when every frame has ground truth
    std::vector<UpsilonStats> log;
};

SequenceResult run_prepared(const std::string& sequence, const std::vector<PreparedFrame>& frames,
                            const ModelWeights& weights, const PipelineConfig& config);

SequenceResult run_sequence(const std::string& sequence, const std::vector<Frame>& frames,
                            const ModelWeights& weights, const PipelineConfig& config,
                            const FeatureExtractor& extractor);

/// Mean IoU loss over the frames; every frame needs ground truth.
Real sequence_loss(const std::vector<PreparedFrame>& frames, const ModelWeights& weights,
                   const PipelineConfig& config);

struct SweepRow {
    std::size_t k = 0;
    MetricsRecord metrics;
};

/// One run per distinct K (ascending). The decoder channel budget is pinned to
/// the config's before K varies, so the same weights serve every K; K = 0 is
/// the memory-off run.
std::vector<SweepRow> sweep_k(const std::string& sequence, const std::vector<PreparedFrame>& frames,
                              const ModelWeights& weights, const PipelineConfig& config,
                              std::vector<std::size_t> k_values);

}  // namespace pmn
