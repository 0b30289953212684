#include "pmn/psm.hpp"

#include <algorithm>
#include <numeric>

#include "pmn/errors.hpp"

namespace pmn {

namespace {

std::vector<Real> channel_max(const Tensor& g) {
    std::vector<Real> out(g.dim(0));
    for (std::size_t i = 0; i < g.dim(0); ++i) {
        const auto r = g.row(i);
        out[i] = *std::max_element(r.begin(), r.end());
    }
    return out;
}

void check_block(const PrototypeBlock& block, std::size_t width) {
    if (block.size() == 0) throw ParameterError("prototype block has no rows");
    if (block.width() != width) {
        throw ConfigError("prototype block width " + std::to_string(block.width()) + " but scorer width " +
                          std::to_string(width));
    }
}

}  // namespace

MemoryBank MemoryBank::with_slots(std::vector<MemorySlot> slots) const {
    MemoryBank out(sequence_, stream_);
    out.slots_ = std::move(slots);
    return out;
}

void PsmWeights::validate() const {
    attention.validate();
    norm1.validate();
    norm2.validate();
    mlp.validate();
    const std::size_t c = width();
    if (norm1.width() != c || norm2.width() != c || mlp.fc1.in_features() != c || mlp.fc2.out_features() != c) {
        throw ConfigError("psm weights: layer norms and mlp must all have width " + std::to_string(c));
    }
}

void MlpScorerWeights::validate() const {
    norm.validate();
    mlp.validate();
    if (mlp.fc1.in_features() != width() || mlp.fc2.out_features() != width()) {
        throw ConfigError("mlp scorer: mlp must map width " + std::to_string(width()) + " to itself");
    }
}

PrototypeBlock build_block(const PrototypeSet& fresh, const MemoryBank& bank) {
    if (fresh.origin != bank.stream()) {
        throw ConfigError("build_block: " + std::string(stream_name(fresh.origin)) + " prototypes with a " +
                          std::string(stream_name(bank.stream())) + " memory bank");
    }
    const std::size_t n = fresh.count(), k = bank.size();
    if (n + k == 0) throw ParameterError("build_block: no prototypes and an empty memory bank");
    const std::size_t c = n > 0 ? fresh.width() : bank.width();
    if (n > 0 && k > 0 && bank.width() != c) {
        throw ConfigError("build_block: prototypes of width " + std::to_string(c) + " but memory holds width " +
                          std::to_string(bank.width()));
    }
    PrototypeBlock block{Tensor::matrix(n + k, c), {}, n};
    block.provenance.reserve(n + k);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(fresh.vectors.row(i).begin(), fresh.vectors.row(i).end(), block.rows.row(i).begin());
        block.provenance.push_back({false, i});
    }
    for (std::size_t s = 0; s < k; ++s) {
        const auto& v = bank.slots()[s].vector;
        std::copy(v.begin(), v.end(), block.rows.row(n + s).begin());
        block.provenance.push_back({true, s});
    }
    return block;
}

ScoreResult score_block(const PrototypeBlock& block, const PsmWeights& weights, const ScoringOptions& options) {
    weights.validate();
    check_block(block, weights.width());
    const Tensor x1 = layer_norm(block.rows, weights.norm1);
    Tensor x2 = multi_head_attention(x1, weights.attention);
    if (options.residuals) x2 = add(x1, x2);
    const Tensor x3 = layer_norm(x2, weights.norm2);
    Tensor x4 = mlp_forward(x3, weights.mlp);
    if (options.residuals) x4 = add(x3, x4);
    ScoreResult out{sigmoid(std::move(x4)), {}};
    out.upsilon = channel_max(out.transformed);
    return out;
}

ScoreResult score_block_mlp(const PrototypeBlock& block, const MlpScorerWeights& weights,
                            const ScoringOptions& options) {
    weights.validate();
    check_block(block, weights.width());
    const Tensor x1 = layer_norm(block.rows, weights.norm);
    Tensor x2 = mlp_forward(x1, weights.mlp);
    if (options.residuals) x2 = add(x1, x2);
    ScoreResult out{sigmoid(std::move(x2)), {}};
    out.upsilon = channel_max(out.transformed);
    return out;
}

Tensor sample_block(const PrototypeBlock& block, const std::vector<Real>& upsilon) {
    if (upsilon.size() != block.size()) {
        throw DimensionError("sample_block: " + std::to_string(upsilon.size()) + " scores for " +
                             std::to_string(block.size()) + " rows");
    }
    Tensor out = block.rows;
    for (std::size_t i = 0; i < block.size(); ++i)
        for (Real& v : out.row(i)) v *= upsilon[i];
    return out;
}

std::vector<std::size_t> rank_by_score(const std::vector<Real>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

MemoryBank update_memory(const MemoryBank& bank, const Tensor& rows, const std::vector<Real>& upsilon,
                         std::size_t capacity) {
    if (capacity == 0) throw ParameterError("update_memory: capacity K must be positive");
    if (rows.rank() != 2 || rows.dim(0) != upsilon.size()) {
        throw DimensionError("update_memory: block " + shape_string(rows.shape()) + " with " +
                             std::to_string(upsilon.size()) + " scores");
    }
    const auto order = rank_by_score(upsilon);
    const std::size_t keep = std::min(capacity, order.size());
    std::vector<MemorySlot> slots;
    slots.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        const auto r = rows.row(order[i]);
        slots.push_back({std::vector<Real>(r.begin(), r.end()), upsilon[order[i]]});
    }
    return bank.with_slots(std::move(slots));
}

MemoryBank reset_memory(const MemoryBank& bank) { return bank.with_slots({}); }

}  // namespace pmn
