#include "pmn/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pmn/errors.hpp"

namespace pmn {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::size_t as_size(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long n = std::stoll(v, &pos);
        if (pos != v.size() || n < 0) throw std::invalid_argument(v);
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
    }
}

Real as_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const Real x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
    }
}

bool as_switch(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "' expects on|off, got '" + v + "'");
}

}  // namespace

std::size_t PipelineConfig::channel_budget() const {
    if (correlation_channels) return correlation_channels;
    return memory_size ? memory_size : 1;
}

void PipelineConfig::validate() const {
    if (height == 0 || width == 0 || height % 16 || width % 16) {
        throw ConfigError("image size " + std::to_string(height) + "x" + std::to_string(width) +
                          " must be positive multiples of 16");
    }
    if (n_segments == 0) throw ConfigError("pipeline.n_segments must be positive");
    if (n_segments > height * width) throw ConfigError("pipeline.n_segments exceeds the pixel count");
    if (model_width == 0 || heads == 0 || model_width % heads) {
        throw ConfigError("model.width " + std::to_string(model_width) + " must be divisible by psm.heads " +
                          std::to_string(heads));
    }
    if (encoder.c1 == 0 || encoder.c2 == 0 || encoder.c3 == 0 || decoder_width == 0) {
        throw ConfigError("encoder and decoder channel counts must be positive");
    }
    if (!(compactness > 0.0)) throw ConfigError("slic.compactness must be positive");
}

PipelineConfig desk_config() {
    PipelineConfig c;
    c.height = 64;
    c.width = 64;
    return c;
}

PipelineConfig toy_config() {
    PipelineConfig c;
    c.height = 32;
    c.width = 32;
    c.n_segments = 16;
    c.memory_size = 6;
    c.model_width = 8;
    c.heads = 2;
    c.encoder = {6, 6, 6};
    c.decoder_width = 2;
    c.tie_streams = true;
    return c;
}

void apply_config_value(PipelineConfig& c, const std::string& key, const std::string& value) {
    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"pipeline.height", [&](const std::string& v) { c.height = as_size(key, v); }},
        {"pipeline.width", [&](const std::string& v) { c.width = as_size(key, v); }},
        {"pipeline.n_segments", [&](const std::string& v) { c.n_segments = as_size(key, v); }},
        {"pipeline.k", [&](const std::string& v) { c.memory_size = as_size(key, v); }},
        {"pipeline.channels", [&](const std::string& v) { c.correlation_channels = as_size(key, v); }},
        {"pipeline.memory", [&](const std::string& v) { c.memory = as_switch(key, v); }},
        {"pipeline.sampler", [&](const std::string& v) { c.sampler = parse_sampler(v); }},
        {"pipeline.scorer",
         [&](const std::string& v) {
             if (v == "transformer") c.scorer = Scorer::transformer;
             else if (v == "mlp") c.scorer = Scorer::mlp;
             else throw ConfigError("pipeline.scorer expects transformer|mlp, got '" + v + "'");
         }},
        {"pipeline.seed", [&](const std::string& v) { c.seed = as_size(key, v); }},
        {"pipeline.threads", [&](const std::string& v) { c.threads = as_size(key, v); }},
        {"psm.residuals", [&](const std::string& v) { c.residuals = as_switch(key, v); }},
        {"psm.heads", [&](const std::string& v) { c.heads = as_size(key, v); }},
        {"psm.mlp_hidden", [&](const std::string& v) { c.mlp_hidden = as_size(key, v); }},
        {"memory.store_raw", [&](const std::string& v) { c.store_raw = as_switch(key, v); }},
        {"model.width", [&](const std::string& v) { c.model_width = as_size(key, v); }},
        {"encoder.c1", [&](const std::string& v) { c.encoder.c1 = as_size(key, v); }},
        {"encoder.c2", [&](const std::string& v) { c.encoder.c2 = as_size(key, v); }},
        {"encoder.c3", [&](const std::string& v) { c.encoder.c3 = as_size(key, v); }},
        {"decoder.width", [&](const std::string& v) { c.decoder_width = as_size(key, v); }},
        {"slic.compactness", [&](const std::string& v) { c.compactness = as_real(key, v); }},
        {"slic.iterations", [&](const std::string& v) { c.slic_iterations = static_cast<int>(as_size(key, v)); }},
        {"weights.tie_streams", [&](const std::string& v) { c.tie_streams = as_switch(key, v); }},
    };
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(value);
}

PipelineConfig parse_config(std::istream& in, PipelineConfig base) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        apply_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, std::move(base));
}

std::string to_string(Sampler s) {
    switch (s) {
        case Sampler::superpixel: return "superpixel";
        case Sampler::grid: return "grid";
        case Sampler::random: return "random";
    }
    return "?";
}

std::string to_string(Scorer s) { return s == Scorer::transformer ? "transformer" : "mlp"; }

Sampler parse_sampler(const std::string& s) {
    if (s == "superpixel") return Sampler::superpixel;
    if (s == "grid") return Sampler::grid;
    if (s == "random") return Sampler::random;
    throw ConfigError("sampler expects superpixel|grid|random, got '" + s + "'");
}

}  // namespace pmn
