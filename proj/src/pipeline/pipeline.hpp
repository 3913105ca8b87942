#pragma once

#include <string>

#include "train/config.hpp"

namespace ewclab {

// Orchestration of the full experiment under one output directory:
//
//   <out>/data/      train/val/ood_{a,b,c} datasets (+ .manifest each)
//   <out>/pretrain/  language-model checkpoint, metrics.csv, run.txt
//   <out>/fisher/    anchor.fisher diagonal scores, run.txt
//   <out>/inject/    arithmetic-tuned checkpoint, metrics.csv, run.txt
//   <out>/sweep/     lambda2_<v>/ sub-runs plus summary.csv
//   <out>/eval/      accuracy/magnitude/retention CSVs, qualitative.txt
//   <out>/overlap/   per-task fisher files and top-n overlap.csv
//
// Every phase writes a run.txt manifest (config, dataset hashes, per-epoch
// losses, final checkpoint hash). Manifests are byte-stable across reruns
// except for the wall_clock_seconds line.

inline constexpr const char* kEwclabVersion = "ewclab 0.1.0";

struct PipelineContext {
    Config config;
    std::string out_root;
    bool quiet = false;
};

void run_gen_data(const PipelineContext& ctx);
void run_pretrain(const PipelineContext& ctx);
void run_fisher(const PipelineContext& ctx);
void run_inject(const PipelineContext& ctx);
void run_sweep(const PipelineContext& ctx);

// Evaluates `checkpoint_path` (default: the inject checkpoint) against the
// validation and out-of-range datasets plus the held-out corpus probe.
void run_eval(const PipelineContext& ctx, const std::string& checkpoint_path = "");

// Fisher overlap of the anchor task against arithmetic train/val, top n
// parameters per layer group.
void run_overlap(const PipelineContext& ctx, size_t top_n = 800);

// gen-data -> pretrain -> fisher -> inject -> eval -> sweep -> overlap.
void run_reproduce(const PipelineContext& ctx);

} // namespace ewclab
