#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"
#include "pmn/errors.hpp"
#include "pmn/pipeline.hpp"
#include "pmn/synth.hpp"
#include "pmn/tensor_file.hpp"
#include "pmn/trainer.hpp"

namespace fs = std::filesystem;
using namespace pmn;

namespace {

constexpr int kBadArguments = 2;
constexpr int kDataError = 3;

struct ModelOptions {
    std::string preset = "desk";
    std::string config_file;
    std::vector<std::string> overrides;
    std::string weights_file;
    std::uint64_t weight_seed = 0;
};

void add_model_options(CLI::App* cmd, ModelOptions& o) {
    cmd->add_option("--preset", o.preset, "Base configuration")
        ->check(CLI::IsMember({"default", "desk", "toy"}))
        ->capture_default_str();
    cmd->add_option("--config", o.config_file, "Config file of key = value lines")->check(CLI::ExistingFile);
    cmd->add_option("--set", o.overrides, "Override a config key, e.g. --set pipeline.k=12");
    cmd->add_option("--weights", o.weights_file, "Weights container; seeded initialization when omitted")
        ->check(CLI::ExistingFile);
    cmd->add_option("--weight-seed", o.weight_seed, "Seed for initialized weights")->capture_default_str();
}

PipelineConfig resolve_config(const ModelOptions& o) {
    PipelineConfig c = o.preset == "toy" ? toy_config() : (o.preset == "desk" ? desk_config() : PipelineConfig{});
    if (!o.config_file.empty()) c = load_config(o.config_file, c);
    for (const std::string& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    c.validate();
    return c;
}

ModelWeights resolve_weights(const ModelOptions& o, const PipelineConfig& c) {
    ModelWeights w = o.weights_file.empty() ? init_weights(c, o.weight_seed)
                                            : weights_from_tensors(TensorFile::load(o.weights_file));
    check_weights(w, c);
    return w;
}

std::vector<fs::path> files_with(const fs::path& dir, const std::string& ext) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::string numbered(const std::string& stem, std::size_t t, const std::string& ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04zu", t);
    return stem + buf + ext;
}

// Dataset layout: rgb/*.ppm, optional flow/*.ppm and gt/*.pgm, matched by sorted order.
std::vector<Frame> load_dataset(const fs::path& dir) {
    const auto rgb = files_with(dir / "rgb", ".ppm");
    if (rgb.empty()) throw FormatError("no rgb/*.ppm frames under " + dir.string());
    const auto flow = files_with(dir / "flow", ".ppm");
    const auto gt = files_with(dir / "gt", ".pgm");
    if (!gt.empty() && gt.size() != rgb.size()) {
        throw FormatError(std::to_string(gt.size()) + " ground-truth masks for " + std::to_string(rgb.size()) +
                          " frames");
    }
    std::vector<Frame> frames;
    for (std::size_t t = 0; t < rgb.size(); ++t) {
        Frame f{read_ppm(rgb[t]), std::nullopt, std::nullopt};
        if (t < flow.size()) f.flow = read_ppm(flow[t]);
        if (!gt.empty()) f.gt = read_mask_pgm(gt[t]);
        frames.push_back(std::move(f));
    }
    return frames;
}

void write_dataset(const fs::path& dir, const SynthSequence& seq) {
    for (const char* sub : {"rgb", "flow", "gt"}) fs::create_directories(dir / sub);
    for (std::size_t t = 0; t < seq.rgb.size(); ++t) {
        write_ppm(dir / "rgb" / numbered("frame_", t, ".ppm"), seq.rgb[t]);
        write_ppm(dir / "flow" / numbered("flow_", t, ".ppm"), seq.flow[t]);
        write_mask_pgm(dir / "gt" / numbered("gt_", t, ".pgm"), seq.gt[t]);
    }
}

FeatureExtractor make_extractor(const std::string& features_dir, const PipelineConfig& c) {
    if (features_dir.empty()) return handcrafted_extractor(c.encoder);
    return [dir = fs::path(features_dir)](const Image&, Stream s, std::size_t t) {
        return load_features(dir / numbered(std::string(stream_name(s)) + "_", t, ".pmnt"));
    };
}

SynthScene scene_named(const std::string& name) {
    if (name == "toy") return toy_scene();
    if (name == "toy-occlusion") return toy_occlusion_scene();
    return desk_scene();
}

void print_metrics(const std::string& sequence, const MetricsRecord& m, const std::string& csv) {
    if (!csv.empty()) {
        std::ofstream out(csv);
        if (!out) throw FormatError("cannot write " + csv);
        write_metrics_header(out);
        write_metrics_rows(out, sequence, m);
    }
    std::printf("J %.4f  F %.4f  J&F %.4f\n", m.j, m.f, m.jf);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prototype memory network for unsupervised video object segmentation"};
    app.require_subcommand(1);

    ModelOptions model;
    std::string data_dir, out_dir, csv, features_dir, tau_dir, sequence = "sequence";
    bool overlay = false, verbose = false;

    auto* segment = app.add_subcommand("segment", "Segment a sequence directory");
    add_model_options(segment, model);
    segment->add_option("--data", data_dir, "Sequence directory (rgb/, flow/, gt/)")->required();
    segment->add_option("--out", out_dir, "Output directory for masks")->required();
    segment->add_option("--features", features_dir, "Directory of <stream>_NNNN.pmnt feature pyramids");
    segment->add_option("--metrics", csv, "Write per-frame J/F CSV (needs gt/)");
    segment->add_option("--dump-tau", tau_dir, "Write correlation maps per frame as .pmnt");
    segment->add_option("--sequence", sequence, "Sequence name for logs and CSV")->capture_default_str();
    segment->add_flag("--overlay", overlay, "Also write superpixel overlays of the rgb frames");
    segment->add_flag("-v,--verbose", verbose, "Print per-frame sampling statistics");

    std::string pred_dir, gt_dir;
    auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
    eval->add_option("--pred", pred_dir, "Directory of predicted .pgm masks")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--gt", gt_dir, "Directory of ground-truth .pgm masks")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--csv", csv, "Write per-frame J/F CSV");
    eval->add_option("--sequence", sequence, "Sequence name for the CSV")->capture_default_str();

    std::string scene = "desk";
    auto* synth = app.add_subcommand("synth", "Write a synthetic moving-object sequence");
    synth->add_option("--scene", scene, "Scene preset")
        ->check(CLI::IsMember({"desk", "toy", "toy-occlusion"}))
        ->capture_default_str();
    synth->add_option("--out", out_dir, "Output directory")->required();

    std::vector<std::size_t> ks{0, 2, 6, 12};
    auto* sweep = app.add_subcommand("sweep-k", "Evaluate one sequence at several memory sizes");
    add_model_options(sweep, model);
    sweep->add_option("--data", data_dir, "Sequence directory with gt/")->required();
    sweep->add_option("--features", features_dir, "Directory of <stream>_NNNN.pmnt feature pyramids");
    sweep->add_option("--k", ks, "Memory sizes")->capture_default_str();

    std::string image_file, labels_file, overlay_file;
    std::size_t n_segments = 100;
    Real compactness = 10.0;
    auto* superpixels = app.add_subcommand("superpixels", "Run SLIC on one image");
    superpixels->add_option("--image", image_file, "Input .ppm")->required()->check(CLI::ExistingFile);
    superpixels->add_option("-n,--segments", n_segments, "Requested superpixels")->capture_default_str();
    superpixels->add_option("--compactness", compactness, "Color/space trade-off")->capture_default_str();
    superpixels->add_option("--labels", labels_file, "16-bit .pgm label map output");
    superpixels->add_option("--overlay", overlay_file, ".ppm boundary overlay output");

    std::size_t steps = 200;
    Real learning_rate = 0.3;
    std::string weights_out;
    std::uint64_t train_seed = 1;
    auto* train = app.add_subcommand("train-toy", "Finite-difference descent on the toy scene");
    train->add_option("--steps", steps, "Descent steps")->capture_default_str();
    train->add_option("--lr", learning_rate, "Learning rate")->capture_default_str();
    train->add_option("--seed", train_seed, "Initial weight seed")->capture_default_str();
    train->add_option("--scene", scene, "Scene preset")
        ->check(CLI::IsMember({"toy", "toy-occlusion"}))
        ->default_val("toy");
    train->add_option("--out", weights_out, "Write trained weights here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kBadArguments;
    }

    try {
        if (*segment) {
            const PipelineConfig config = resolve_config(model);
            const ModelWeights weights = resolve_weights(model, config);
            const std::vector<Frame> frames = load_dataset(data_dir);
            const auto prepared = prepare_sequence(frames, config, make_extractor(features_dir, config));
            fs::create_directories(out_dir);
            if (!tau_dir.empty()) fs::create_directories(tau_dir);
            SequenceState state = SequenceState::start(sequence);
            std::vector<SegMask> masks;
            for (const PreparedFrame& f : prepared) {
                FrameResult r = process_frame(state, f, weights, config);
                write_mask_pgm(fs::path(out_dir) / numbered("mask_", f.index, ".pgm"), r.mask);
                if (overlay) {
                    write_ppm(fs::path(out_dir) / numbered("overlay_", f.index, ".ppm"),
                              overlay_boundaries(frames[f.index].rgb, f.stream(Stream::rgb).superpixels));
                }
                if (!tau_dir.empty()) {
                    TensorFile tf;
                    for (Stream s : {Stream::rgb, Stream::flow})
                        for (std::size_t l = 0; l < 3; ++l)
                            tf.add(std::string(stream_name(s)) + ".tau" + std::to_string(l + 1),
                                   r.streams[static_cast<std::size_t>(s)].tau.levels[l]);
                    tf.save(fs::path(tau_dir) / numbered("tau_", f.index, ".pmnt"));
                }
                if (verbose) {
                    for (Stream s : {Stream::rgb, Stream::flow}) {
                        const StreamTrace& t = r.streams[static_cast<std::size_t>(s)];
                        const auto [lo, hi] = std::minmax_element(t.upsilon.begin(), t.upsilon.end());
                        std::printf("frame %zu %s: %zu rows, upsilon [%.4f, %.4f], bank %zu\n", f.index,
                                    std::string(stream_name(s)).c_str(), t.block_rows, *lo, *hi, t.bank_size);
                    }
                }
                state = std::move(r.state);
                masks.push_back(std::move(r.mask));
            }
            std::printf("wrote %zu masks to %s\n", masks.size(), out_dir.c_str());
            const bool have_gt = std::all_of(frames.begin(), frames.end(), [](const Frame& f) { return f.gt.has_value(); });
            if (have_gt) {
                std::vector<BinaryMask> gts;
                for (const Frame& f : frames) gts.push_back(*f.gt);
                print_metrics(sequence, sequence_metrics(masks, gts), csv);
            } else if (!csv.empty()) {
                throw FormatError("--metrics needs a gt/ mask for every frame");
            }
        } else if (*eval) {
            const auto preds = files_with(pred_dir, ".pgm"), gts = files_with(gt_dir, ".pgm");
            if (preds.size() != gts.size()) {
                throw FormatError(std::to_string(preds.size()) + " predictions for " + std::to_string(gts.size()) +
                                  " ground-truth masks");
            }
            std::vector<BinaryMask> p, g;
            for (std::size_t i = 0; i < preds.size(); ++i) {
                p.push_back(read_mask_pgm(preds[i]));
                g.push_back(read_mask_pgm(gts[i]));
            }
            print_metrics(sequence, sequence_metrics(p, g), csv);
        } else if (*synth) {
            const SynthSequence seq = synth_generate(scene_named(scene));
            write_dataset(out_dir, seq);
            std::printf("wrote %zu frames to %s\n", seq.rgb.size(), out_dir.c_str());
        } else if (*sweep) {
            const PipelineConfig config = resolve_config(model);
            const ModelWeights weights = resolve_weights(model, config);
            const auto prepared = prepare_sequence(load_dataset(data_dir), config, make_extractor(features_dir, config));
            std::printf("k,J,F,JF\n");
            for (const SweepRow& r : sweep_k(sequence, prepared, weights, config, ks))
                std::printf("%zu,%.6f,%.6f,%.6f\n", r.k, r.metrics.j, r.metrics.f, r.metrics.jf);
        } else if (*superpixels) {
            const Image img = read_ppm(image_file);
            const SuperpixelMap m = slic_segment(img, {.n_segments = n_segments, .compactness = compactness});
            std::printf("%zu superpixels\n", m.count);
            if (!labels_file.empty()) {
                std::vector<std::uint16_t> levels(m.labels.begin(), m.labels.end());
                write_pgm16(labels_file, m.height, m.width, levels);
            }
            if (!overlay_file.empty()) write_ppm(overlay_file, overlay_boundaries(img, m));
        } else if (*train) {
            const PipelineConfig config = toy_config();
            const SynthSequence seq = synth_generate(scene_named(scene));
            std::vector<Frame> frames;
            for (std::size_t t = 0; t < seq.rgb.size(); ++t) frames.push_back({seq.rgb[t], seq.flow[t], seq.gt[t]});
            const auto prepared = prepare_sequence(frames, config, handcrafted_extractor(config.encoder));
            const ModelWeights initial = init_weights(config, train_seed);
            std::printf("%zu parameters\n", parameter_count(initial));
            const TrainResult r = train_toy(prepared, initial, config, {.steps = steps, .learning_rate = learning_rate});
            for (std::size_t i = 0; i < r.trace.size(); ++i)
                if (i % 10 == 0 || i + 1 == r.trace.size()) std::printf("step %zu loss %.6f\n", i, r.trace[i]);
            std::printf("loss ratio %.4f\n", r.trace.back() / r.trace.front());
            if (!weights_out.empty()) weights_to_tensors(r.weights).save(weights_out);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kBadArguments;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kDataError;
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kDataError;
    }
    return 0;
}
