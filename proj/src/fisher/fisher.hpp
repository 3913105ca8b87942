#pragma once

#include <functional>
#include <string>
#include <vector>

#include "data/gen.hpp"
#include "model/encoder.hpp"

namespace ewclab {

// Per-parameter curvature proxy: the mean squared per-sample gradient of the
// masked cross-entropy, taken at fixed parameters. Accumulated and stored in
// 64-bit; aligned to the slice manifest of the model it came from.
struct FisherScores {
    std::vector<double> values;
    std::string manifest;  // slice manifest text of the source parameters
    std::string task_id;
    long long n_samples = 0;
    uint64_t model_hash = 0;
};

// Accumulation core: n_samples callbacks, each filling one sample's gradient
// into a zeroed buffer. Samples are pre-partitioned into 8 fixed contiguous
// chunks whose partial sums merge in partition order, so the result does not
// depend on how many executors ran them.
FisherScores estimate_fisher_core(
    size_t param_count, long long n_samples,
    const std::function<void(long long sample, float* grad)>& grad_fn);

// Model-driven estimation over the first min(|dataset|, sample_cap) samples.
// Every instance must carry at least one masked position.
FisherScores estimate_fisher(Model& model, const std::vector<MaskedInstance>& dataset,
                             long long sample_cap, const std::string& task_id);

// Indices of the n largest scores, ties to the lowest index, returned in
// ascending index order. n must lie in [1, score count].
std::vector<size_t> top_n(const std::vector<double>& scores, size_t n);

// Per-layer comparison of where tasks concentrate their curvature. For each
// layer the base task's top-min(n, layer size) parameters are selected; every
// other task reports its scores at exactly those indices.
struct OverlapReport {
    struct Layer {
        std::string name;
        std::vector<size_t> indices;       // global, in descending-score rank order
        std::vector<double> base_scores;   // base score per rank
        // scores[t][r] = task t's score at rank r's index.
        std::vector<std::vector<double>> scores;
        struct Stats {
            double mean = 0.0, median = 0.0, max = 0.0;
        };
        std::vector<Stats> stats;  // one per comparison task
    };
    std::string base_task;
    std::vector<std::string> task_ids;
    size_t n = 0;
    std::vector<Layer> layers;
};

OverlapReport cross_task_overlap(const FisherScores& base,
                                 const std::vector<FisherScores>& others, size_t n,
                                 const std::vector<LayerGroup>& layers);

// CSV rows: layer, rank, param_index, base_score, score_task_1..k.
std::string overlap_csv(const OverlapReport& report);

// Text manifest + little-endian 64-bit blob, integrity-hashed.
void save_fisher(const std::string& path, const FisherScores& f);
FisherScores load_fisher(const std::string& path);

} // namespace ewclab
