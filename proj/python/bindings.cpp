#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pmn/errors.hpp"
#include "pmn/pipeline.hpp"
#include "pmn/synth.hpp"
#include "pmn/trainer.hpp"

namespace py = pybind11;
using namespace pmn;

namespace {

using RealArray = py::array_t<Real, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Image to_image(const RealArray& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw DimensionError("expected an H x W x 3 array");
    Image img(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), img.pixels.begin());
    return img;
}

RealArray from_image(const Image& img) {
    RealArray a({img.height, img.width, std::size_t{3}});
    std::copy(img.pixels.begin(), img.pixels.end(), a.mutable_data());
    return a;
}

BinaryMask to_mask(const ByteArray& a) {
    if (a.ndim() != 2) throw DimensionError("expected an H x W mask");
    BinaryMask m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    for (std::size_t i = 0; i < m.bits.size(); ++i) m.bits[i] = a.data()[i] != 0;
    return m;
}

ByteArray from_mask(const BinaryMask& m) {
    ByteArray a({m.height, m.width});
    std::copy(m.bits.begin(), m.bits.end(), a.mutable_data());
    return a;
}

SynthScene scene_named(const std::string& name) {
    if (name == "toy") return toy_scene();
    if (name == "toy-occlusion") return toy_occlusion_scene();
    if (name == "desk") return desk_scene();
    throw ParameterError("unknown scene '" + name + "'");
}

PipelineConfig make_config(const std::string& preset, const std::map<std::string, std::string>& overrides) {
    PipelineConfig c;
    if (preset == "toy") c = toy_config();
    else if (preset == "desk") c = desk_config();
    else if (preset != "default") throw ConfigError("unknown preset '" + preset + "'");
    for (const auto& [k, v] : overrides) apply_config_value(c, k, v);
    c.validate();
    return c;
}

py::dict metrics_dict(const MetricsRecord& m) {
    py::dict d;
    std::vector<Real> j, f;
    for (const auto& s : m.frames) {
        j.push_back(s.j);
        f.push_back(s.f);
    }
    d["J"] = m.j;
    d["F"] = m.f;
    d["JF"] = m.jf;
    d["frame_J"] = j;
    d["frame_F"] = f;
    return d;
}

std::vector<PreparedFrame> prepare_scene(const std::string& scene, const PipelineConfig& c) {
    const SynthSequence seq = synth_generate(scene_named(scene));
    std::vector<Frame> frames;
    for (std::size_t t = 0; t < seq.rgb.size(); ++t) frames.push_back({seq.rgb[t], seq.flow[t], seq.gt[t]});
    return prepare_sequence(frames, c, handcrafted_extractor(c.encoder));
}

}  // namespace

PYBIND11_MODULE(_pmn, m) {
    m.doc() = "Prototype memory network core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

    m.def(
        "synth",
        [](const std::string& scene) {
            const SynthSequence seq = synth_generate(scene_named(scene));
            py::list rgb, flow, gt;
            for (std::size_t t = 0; t < seq.rgb.size(); ++t) {
                rgb.append(from_image(seq.rgb[t]));
                flow.append(from_image(seq.flow[t]));
                gt.append(from_mask(seq.gt[t]));
            }
            py::dict d;
            d["rgb"] = rgb;
            d["flow"] = flow;
            d["gt"] = gt;
            return d;
        },
        py::arg("scene") = "toy", "Synthetic sequence as lists of H x W x 3 frames and H x W masks");

    m.def(
        "slic",
        [](const RealArray& image, std::size_t n_segments, Real compactness, int iterations) {
            const SuperpixelMap map = slic_segment(
                to_image(image), {.n_segments = n_segments, .compactness = compactness, .iterations = iterations});
            py::array_t<std::int32_t> out({map.height, map.width});
            std::copy(map.labels.begin(), map.labels.end(), out.mutable_data());
            return out;
        },
        py::arg("image"), py::arg("n_segments") = 100, py::arg("compactness") = 10.0, py::arg("iterations") = 10);

    m.def("region_j", [](const ByteArray& p, const ByteArray& g) { return region_j(to_mask(p), to_mask(g)); });
    m.def("f_measure", [](const ByteArray& p, const ByteArray& g) { return f_measure(to_mask(p), to_mask(g)); });
    m.def("iou_loss", [](const RealArray& p, const ByteArray& g) {
        if (p.ndim() != 2) throw DimensionError("expected an H x W prediction");
        SegMask s{static_cast<std::size_t>(p.shape(0)), static_cast<std::size_t>(p.shape(1)),
                  std::vector<Real>(p.data(), p.data() + p.size())};
        return iou_loss(s, to_mask(g));
    });

    m.def(
        "parameter_count",
        [](const std::string& preset, const std::map<std::string, std::string>& overrides) {
            const PipelineConfig c = make_config(preset, overrides);
            return parameter_count(init_weights(c, 0));
        },
        py::arg("preset") = "toy", py::arg("overrides") = std::map<std::string, std::string>{});

    m.def(
        "segment_scene",
        [](const std::string& scene, const std::string& preset, const std::map<std::string, std::string>& overrides,
           std::uint64_t weight_seed) {
            const PipelineConfig c = make_config(preset, overrides);
            const SequenceResult r = run_prepared(scene, prepare_scene(scene, c), init_weights(c, weight_seed), c);
            py::list masks;
            for (const SegMask& s : r.masks) {
                RealArray a({s.height, s.width});
                std::copy(s.values.begin(), s.values.end(), a.mutable_data());
                masks.append(a);
            }
            return py::make_tuple(masks, metrics_dict(*r.metrics));
        },
        py::arg("scene") = "toy", py::arg("preset") = "toy",
        py::arg("overrides") = std::map<std::string, std::string>{}, py::arg("weight_seed") = 0,
        "Run the pipeline on a synthetic scene; returns (soft masks, metrics)");

    m.def(
        "train_toy",
        [](std::size_t steps, Real learning_rate, std::uint64_t seed) {
            const PipelineConfig c = toy_config();
            py::gil_scoped_release release;
            const TrainResult r =
                train_toy(prepare_scene("toy", c), init_weights(c, seed), c, {.steps = steps, .learning_rate = learning_rate});
            return r.trace;
        },
        py::arg("steps") = 5, py::arg("learning_rate") = 0.3, py::arg("seed") = 1, "Loss trace of a toy FD run");
}
