#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "data/corpus.hpp"
#include "data/gen.hpp"
#include "loss/losses.hpp"
#include "model/encoder.hpp"
#include "train/optim.hpp"

namespace ewclab {

// One training example: a masked sequence plus, for arithmetic results, the
// numeric reading the differentiable decoder should produce.
struct TrainInstance {
    MaskedInstance masked;
    std::vector<double> place_values;  // aligned with masked.positions; empty otherwise
    double y = 0.0;
    bool has_value = false;
};

TrainInstance arithmetic_instance(const ArithmeticExample& ex, const Vocabulary& vocab,
                                  int max_seq_len);
std::vector<TrainInstance> arithmetic_instances(const std::vector<ArithmeticExample>& examples,
                                                const Vocabulary& vocab, int max_seq_len);

// Instances for one epoch. Arithmetic injection feeds a fixed list; masked
// corpus training redraws the mask layout every epoch.
using BatchProvider = std::function<std::vector<TrainInstance>(int epoch)>;

BatchProvider fixed_provider(std::vector<TrainInstance> instances);
BatchProvider corpus_provider(const Corpus& corpus, const Vocabulary& vocab,
                              double mask_fraction, uint64_t seed,
                              size_t window_begin, size_t window_end);

struct TrainOptions {
    int epochs = 1;
    int batch_size = 32;
    AdamConfig adam;
    double clip_norm = 1.0;  // <= 0 disables clipping
    Lambda1Schedule lambda1 = Lambda1Schedule::constant(0.0);
    double lambda2 = 0.0;
    RegMode reg_mode = RegMode::euclidean;
    double reg_cap = 0.0;    // <= 0 uncapped
    bool ce_only = false;    // cross-entropy alone, no decode/regularizer path
    uint64_t seed = 1;
    const float* anchor = nullptr;   // both required when lambda2 > 0
    const double* fisher = nullptr;
    void validate() const;
};

struct StepRow {
    long long step = 0;  // 1-based, global across epochs
    int epoch = 0;
    LossBreakdown loss;
};

struct EpochRow {
    int epoch = 0;
    LossBreakdown mean;  // unweighted mean over the epoch's steps
};

struct TrainResult {
    std::vector<StepRow> steps;
    std::vector<EpochRow> epochs;
    double final_lambda1 = 0.0;
};

// Shuffled mini-batch descent on mean masked cross-entropy plus the weighted
// numeric regularizer and the quadratic anchor penalty. Parameters are
// updated in place; the caller owns checkpointing.
//
// When the regularizer weight is pinned to constant 0 the decode path is not
// built at all, so such a run is bit-identical to a ce_only run, and a
// lambda2 = 0 run never reads the anchor. Epoch shuffles derive from
// (seed, epoch) only, keeping traces comparable across differently labeled
// configurations.
TrainResult train_loop(Model& model, const BatchProvider& provider, const TrainOptions& opt);

} // namespace ewclab
