#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "pmn/encoder.hpp"

namespace pmn {

enum class Sampler { superpixel, grid, random };
enum class Scorer { transformer, mlp };

/// Everything that shapes a run. Config files hold `key = value` lines with
/// namespaced keys (see apply_config_value); `#` starts a comment.
struct PipelineConfig {
    std::size_t height = 352;
    std::size_t width = 352;
    std::size_t n_segments = 100;          // N
    std::size_t memory_size = 50;          // K; 0 disables memory
    std::size_t correlation_channels = 0;  // decoder channel budget per stream; 0 -> memory_size
    bool memory = true;
    Sampler sampler = Sampler::superpixel;
    Scorer scorer = Scorer::transformer;
    bool residuals = true;
    bool store_raw = false;
    std::size_t heads = 4;
    std::size_t mlp_hidden = 0;  // 0 -> 2C
    std::size_t model_width = 32;  // C
    EncoderChannels encoder{16, 16, 16};
    std::size_t decoder_width = 16;  // D
    Real compactness = 10.0;
    int slic_iterations = 10;
    std::uint64_t seed = 0;
    bool tie_streams = false;
    std::size_t threads = 1;

    bool memory_enabled() const { return memory && memory_size > 0; }
    std::size_t channel_budget() const;
    std::size_t hidden_width() const { return mlp_hidden ? mlp_hidden : 2 * model_width; }
    void validate() const;
};

/// 64x64 desk-scale variant of the default configuration.
PipelineConfig desk_config();

/// 32x32, N=16, K=6, C=8, two heads, tied streams, D=2: small enough for
/// finite-difference training (see parameter_count).
PipelineConfig toy_config();

/// Throws ConfigError for unknown keys or unparsable values.
void apply_config_value(PipelineConfig& config, const std::string& key, const std::string& value);

PipelineConfig parse_config(std::istream& in, PipelineConfig base);
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base);

std::string to_string(Sampler s);
std::string to_string(Scorer s);
Sampler parse_sampler(const std::string& s);

}  // namespace pmn
