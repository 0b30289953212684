// Prints the measurements behind the pinned acceptance thresholds.
// Usage: pmn_derive_thresholds [--train]

#include <cstdio>
#include <cstring>

#include "pmn/pipeline.hpp"
#include "pmn/trainer.hpp"
#include "support/scenarios.hpp"

using namespace pmn;

int main(int argc, char** argv) {
    const SynthSequence seq = synth_generate(scenario::oracle_scene());
    const PipelineConfig config = scenario::oracle_config();
    const SequenceResult r = run_sequence("oracle", scenario::frames_of(seq), scenario::pass_through_weights(config, 3),
                                          config, scenario::oracle_extractor(seq.gt, config.encoder.c1));
    for (std::size_t t = 0; t < r.metrics->frames.size(); ++t)
        std::printf("oracle frame %zu: J %.4f F %.4f\n", t, r.metrics->frames[t].j, r.metrics->frames[t].f);
    std::printf("oracle mean J %.4f, mean F %.4f\n", r.metrics->j, r.metrics->f);

    if (argc > 1 && std::strcmp(argv[1], "--train") == 0) {
        const PipelineConfig toy = toy_config();
        const auto frames = scenario::prepare_toy(toy_scene(), toy);
        const ModelWeights initial = init_weights(toy, scenario::kToyWeightSeed);
        std::printf("toy parameters: %zu\n", parameter_count(initial));
        const TrainResult t = train_toy(frames, initial, toy,
                                        {.steps = scenario::kToySteps, .learning_rate = scenario::kToyLearningRate});
        for (std::size_t i = 0; i < t.trace.size(); i += 10) std::printf("step %3zu loss %.6f\n", i, t.trace[i]);
        std::printf("loss %.6f -> %.6f, ratio %.4f\n", t.trace.front(), t.trace.back(), t.trace.back() / t.trace.front());
    }
    return 0;
}
