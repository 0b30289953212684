#pragma once

#include <string>
#include <vector>

#include "pmn/numerics.hpp"
#include "pmn/pgm.hpp"

namespace pmn {

/// Where a prototype-block row came from.
struct RowOrigin {
    bool from_memory = false;
    std::size_t index = 0;  // new-frame prototype index or memory slot

    friend bool operator==(const RowOrigin&, const RowOrigin&) = default;
};

/// New-frame prototypes (first N' rows) followed by memory prototypes (K' rows).
struct PrototypeBlock {
    Tensor rows;
    std::vector<RowOrigin> provenance;
    std::size_t fresh = 0;

    std::size_t size() const { return provenance.size(); }
    std::size_t width() const { return rows.empty() ? 0 : rows.dim(1); }
};

struct MemorySlot {
    std::vector<Real> vector;
    Real score = 0.0;

    friend bool operator==(const MemorySlot&, const MemorySlot&) = default;
};

/// At most K scored prototypes of one stream of one sequence, kept in
/// descending score order (ties in insertion order). Values are immutable:
/// every update returns a new bank.
class MemoryBank {
public:
    MemoryBank() = default;
    MemoryBank(std::string sequence, Stream stream) : sequence_(std::move(sequence)), stream_(stream) {}

    const std::string& sequence() const noexcept { return sequence_; }
    Stream stream() const noexcept { return stream_; }
    const std::vector<MemorySlot>& slots() const noexcept { return slots_; }
    std::size_t size() const noexcept { return slots_.size(); }
    bool empty() const noexcept { return slots_.empty(); }
    std::size_t width() const noexcept { return slots_.empty() ? 0 : slots_.front().vector.size(); }

    /// Same identity, with the given slots (must already be ordered).
    MemoryBank with_slots(std::vector<MemorySlot> slots) const;

    friend bool operator==(const MemoryBank&, const MemoryBank&) = default;

private:
    std::string sequence_;
    Stream stream_ = Stream::rgb;
    std::vector<MemorySlot> slots_;
};

/// Single transformer block: LN -> MHA -> LN -> MLP, then sigmoid.
struct PsmWeights {
    LayerNormParams norm1;
    AttentionParams attention;
    LayerNormParams norm2;
    MlpParams mlp;

    std::size_t width() const { return attention.width(); }
    void validate() const;
};

/// Attention-free ablation scorer: LN -> MLP, then sigmoid.
struct MlpScorerWeights {
    LayerNormParams norm;
    MlpParams mlp;

    std::size_t width() const { return norm.width(); }
    void validate() const;
};

struct ScoringOptions {
    // residual connections around the attention and MLP sublayers
    bool residuals = true;
};

/// Sigmoid output g of the scorer and Upsilon_i = max_c g(i, c).
struct ScoreResult {
    Tensor transformed;
    std::vector<Real> upsilon;
};

PrototypeBlock build_block(const PrototypeSet& fresh, const MemoryBank& bank);

ScoreResult score_block(const PrototypeBlock& block, const PsmWeights& weights, const ScoringOptions& options = {});
ScoreResult score_block_mlp(const PrototypeBlock& block, const MlpScorerWeights& weights,
                            const ScoringOptions& options = {});

/// Row i of the result is upsilon[i] times row i of the input block.
Tensor sample_block(const PrototypeBlock& block, const std::vector<Real>& upsilon);

/// Keep the `capacity` rows of `rows` with the largest scores (ties -> lower
/// row index), stored in descending-score order. `rows` is normally the
/// sampled block.
MemoryBank update_memory(const MemoryBank& bank, const Tensor& rows, const std::vector<Real>& upsilon,
                         std::size_t capacity);

MemoryBank reset_memory(const MemoryBank& bank);

/// Row order of update_memory: indices sorted by score, descending, stable.
std::vector<std::size_t> rank_by_score(const std::vector<Real>& scores);

}  // namespace pmn
