#include "pipeline/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "data/corpus.hpp"
#include "data/dataio.hpp"
#include "data/gen.hpp"
#include "eval/eval.hpp"
#include "fisher/fisher.hpp"
#include "loss/losses.hpp"
#include "model/checkpoint.hpp"
#include "model/encoder.hpp"
#include "train/train.hpp"
#include "util/fmt.hpp"
#include "util/fs.hpp"
#include "util/hash.hpp"
#include "util/status.hpp"

namespace ewclab {

static const char* kCodeVersion = kEwclabVersion;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string pjoin(const std::string& a, const std::string& b) {
    return (std::filesystem::path(a) / b).string();
}

void note(const PipelineContext& ctx, const std::string& line) {
    if (!ctx.quiet) std::printf("%s\n", line.c_str());
}

void kv(const std::string& key, const std::string& value) {
    std::printf("%s=%s\n", key.c_str(), value.c_str());
}

void kv(const std::string& key, double value) { kv(key, fmt_double(value)); }

void kv_int(const std::string& key, long long value) { kv(key, strf("%lld", value)); }

ModelConfig model_config_of(const Config& c, const Vocabulary& vocab) {
    ModelConfig mc;
    mc.vocab_size = vocab.size();
    mc.d_model = static_cast<int>(c.get_int("model.d_model"));
    mc.n_layers = static_cast<int>(c.get_int("model.n_layers"));
    mc.n_heads = static_cast<int>(c.get_int("model.n_heads"));
    mc.d_ff = static_cast<int>(c.get_int("model.d_ff"));
    mc.max_seq_len = static_cast<int>(c.get_int("model.max_seq_len"));
    mc.seed = c.get_seed("model.seed");
    return mc;
}

Decimal parse_bound(const Config& c, const std::string& key, int places) {
    const std::string text = c.get(key);
    auto d = parse_canonical(text, places);
    require(d.has_value(), Status::bad_config,
            "config: " + key + " = '" + text + "' is not a canonical numeral with " +
                std::to_string(places) + " decimal places");
    return *d;
}

Decimal whole_bound(long long whole, int places) {
    long long scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    return Decimal{whole * scale, places};
}

GenConfig in_domain_gen(const Config& c) {
    GenConfig g;
    g.decimal_places = static_cast<int>(c.get_int("data.decimal_places"));
    g.range.lo = parse_bound(c, "data.range_lo", g.decimal_places);
    g.range.hi = parse_bound(c, "data.range_hi", g.decimal_places);
    g.operators = c.get("data.operators");
    g.count = c.get_int("data.count");
    g.seed = c.get_seed("data.seed");
    return g;
}

Lambda1Schedule lambda1_of(const Config& c) {
    const std::string mode = c.get("train.lambda1.mode");
    const double value = c.get_double("train.lambda1.value");
    if (mode == "constant") return Lambda1Schedule::constant(value);
    if (mode == "ema")
        return Lambda1Schedule::ema(value, c.get_double("train.lambda1.w_prev"),
                                    c.get_double("train.lambda1.w_curr"));
    throw Error(Status::bad_config, "config: train.lambda1.mode must be constant or ema, got '" +
                                        mode + "'");
}

RegMode reg_mode_of(const Config& c) {
    const std::string mode = c.get("train.reg_mode");
    if (mode == "euclidean") return RegMode::euclidean;
    if (mode == "literal_abs") return RegMode::literal_abs;
    throw Error(Status::bad_config,
                "config: train.reg_mode must be euclidean or literal_abs, got '" + mode + "'");
}

bool ce_only_of(const Config& c) {
    const std::string stack = c.get("train.loss_stack");
    if (stack == "full") return false;
    if (stack == "ce_only") return true;
    throw Error(Status::bad_config,
                "config: train.loss_stack must be full or ce_only, got '" + stack + "'");
}

struct ManifestInfo {
    std::string subcommand;
    std::vector<std::pair<std::string, std::string>> datasets;  // label -> content hash hex
    const TrainResult* training = nullptr;
    bool has_final = false;
    uint64_t final_hash = 0;
    double wall_seconds = 0.0;
};

void write_manifest(const std::string& path, const Config& cfg, const ManifestInfo& info) {
    std::string s;
    s += "ewclab_run 1\n";
    s += "subcommand " + info.subcommand + "\n";
    s += std::string("code_version ") + kCodeVersion + "\n";
    s += "config_begin\n";
    s += cfg.render();
    s += "config_end\n";
    for (const auto& d : info.datasets) s += "dataset " + d.first + " " + d.second + "\n";
    if (info.training != nullptr) {
        for (const auto& e : info.training->epochs) {
            s += strf("epoch %d", e.epoch);
            s += " ce " + fmt_double(e.mean.ce);
            s += " reg " + fmt_double(e.mean.reg);
            s += " ewc " + fmt_double(e.mean.ewc);
            s += " lambda1 " + fmt_double(e.mean.lambda1);
            s += " total " + fmt_double(e.mean.total);
            s += "\n";
        }
    }
    if (info.has_final) s += "final_checkpoint " + hash_hex(info.final_hash) + "\n";
    s += "wall_clock_seconds " + fmt_double(info.wall_seconds) + "\n";
    write_file(path, s);
}

std::string metrics_csv_text(const TrainResult& r) {
    std::string s = "step,epoch,ce,reg,ewc,lambda1,lambda2,total\n";
    for (const auto& row : r.steps) {
        s += strf("%lld,%d,", row.step, row.epoch);
        s += fmt_double(row.loss.ce) + "," + fmt_double(row.loss.reg) + "," +
             fmt_double(row.loss.ewc) + "," + fmt_double(row.loss.lambda1) + "," +
             fmt_double(row.loss.lambda2) + "," + fmt_double(row.loss.total) + "\n";
    }
    return s;
}

Corpus load_corpus(const Config& c) {
    return Corpus::load(c.get("corpus.path"), static_cast<int>(c.get_int("corpus.window_len")));
}

std::string pretrain_ckpt(const PipelineContext& ctx) {
    return pjoin(ctx.out_root, pjoin("pretrain", "checkpoint.ckpt"));
}

std::string anchor_fisher_path(const PipelineContext& ctx) {
    return pjoin(ctx.out_root, pjoin("fisher", "anchor.fisher"));
}

std::string dataset_path(const PipelineContext& ctx, const std::string& name) {
    return pjoin(ctx.out_root, pjoin("data", name + ".txt"));
}

}  // namespace

void run_gen_data(const PipelineContext& ctx) {
    Timer tm;
    const Config& c = ctx.config;
    const std::string dir = pjoin(ctx.out_root, "data");

    const GenConfig in = in_domain_gen(c);
    const auto all = generate(in);
    auto split = split_stratified(all, c.get_double("data.val_fraction"));
    require(!split.first.empty() && !split.second.empty(), Status::bad_config,
            "gen-data: stratified split produced an empty side");
    write_dataset(pjoin(dir, "train.txt"), "train", split.first, in);
    write_dataset(pjoin(dir, "val.txt"), "val", split.second, in);

    const long long ood_count = c.get_int("data.ood_count");
    const Decimal bounds[4] = {in.range.hi, whole_bound(10000, in.decimal_places),
                               whole_bound(100000, in.decimal_places),
                               whole_bound(1000000, in.decimal_places)};
    const char* names[3] = {"ood_a", "ood_b", "ood_c"};
    for (int k = 0; k < 3; ++k) {
        GenConfig g = in;
        g.range.lo = bounds[k];
        g.range.hi = bounds[k + 1];
        g.count = ood_count;
        g.seed = seed_for(in.seed, "ood", static_cast<uint64_t>(k));
        write_dataset(pjoin(dir, std::string(names[k]) + ".txt"), names[k], generate(g), g);
    }

    ManifestInfo info;
    info.subcommand = "gen-data";
    const char* labels[5] = {"train", "val", "ood_a", "ood_b", "ood_c"};
    for (const char* label : labels) {
        LoadedDataset ds = load_dataset(pjoin(dir, std::string(label) + ".txt"));
        info.datasets.push_back({label, hash_hex(ds.manifest.content_hash)});
        kv_int(std::string(label) + "_count", static_cast<long long>(ds.examples.size()));
    }
    info.wall_seconds = tm.seconds();
    write_manifest(pjoin(dir, "run.txt"), c, info);
    note(ctx, "gen-data: wrote 5 datasets to " + dir);
}

void run_pretrain(const PipelineContext& ctx) {
    Timer tm;
    const Config& c = ctx.config;
    const std::string dir = pjoin(ctx.out_root, "pretrain");

    const Vocabulary vocab = Vocabulary::printable_ascii();
    const Corpus corpus = load_corpus(c);
    const size_t heldout = corpus.heldout_begin(c.get_double("corpus.heldout_fraction"));
    require(heldout > 0, Status::bad_config, "pretrain: corpus has no training windows");

    const ModelConfig mc = model_config_of(c, vocab);
    require(mc.max_seq_len >= corpus.window_len(), Status::bad_config,
            "pretrain: corpus.window_len exceeds model.max_seq_len");
    Model model(mc, vocab);

    TrainOptions opt;
    opt.epochs = static_cast<int>(c.get_int("pretrain.epochs"));
    opt.batch_size = static_cast<int>(c.get_int("pretrain.batch_size"));
    opt.adam.learning_rate = c.get_double("train.learning_rate");
    opt.clip_norm = c.get_double("train.clip_norm");
    opt.lambda1 = Lambda1Schedule::constant(0.0);
    opt.lambda2 = 0.0;
    opt.ce_only = true;
    opt.seed = c.get_seed("train.seed");

    auto provider = corpus_provider(corpus, vocab, c.get_double("corpus.mask_fraction"), opt.seed,
                                    0, heldout);
    note(ctx, strf("pretrain: %zu training windows, %d epochs", heldout, opt.epochs));
    const TrainResult result = train_loop(model, provider, opt);

    const Provenance prov{{"phase", "pretrain"},
                          {"corpus_hash", hash_hex(corpus.content_hash())},
                          {"code_version", kCodeVersion}};
    save_checkpoint(pjoin(dir, "checkpoint.ckpt"), model, prov);
    write_file(pjoin(dir, "metrics.csv"), metrics_csv_text(result));

    ManifestInfo info;
    info.subcommand = "pretrain";
    info.datasets = {{"corpus", hash_hex(corpus.content_hash())}};
    info.training = &result;
    info.has_final = true;
    info.final_hash = model.params().value_hash();
    info.wall_seconds = tm.seconds();
    write_manifest(pjoin(dir, "run.txt"), c, info);

    if (!result.epochs.empty()) kv("pretrain_final_ce", result.epochs.back().mean.ce);
    kv("pretrain_checkpoint", pjoin(dir, "checkpoint.ckpt"));
}

void run_fisher(const PipelineContext& ctx) {
    Timer tm;
    const Config& c = ctx.config;
    const std::string dir = pjoin(ctx.out_root, "fisher");

    LoadedCheckpoint lc = load_checkpoint(pretrain_ckpt(ctx));
    const Corpus corpus = load_corpus(c);
    const size_t heldout = corpus.heldout_begin(c.get_double("corpus.heldout_fraction"));
    const double mask_fraction = c.get_double("corpus.mask_fraction");
    const uint64_t mask_seed = seed_for(c.get_seed("train.seed"), "anchor-fisher");

    std::vector<MaskedInstance> dataset;
    dataset.reserve(heldout);
    for (size_t i = 0; i < heldout; ++i) {
        MaskedInstance mi = mask_window(corpus, i, lc.model->vocab(), mask_fraction, mask_seed);
        if (!mi.positions.empty()) dataset.push_back(std::move(mi));
    }
    require(!dataset.empty(), Status::bad_config, "fisher: no maskable training windows");

    const FisherScores f =
        estimate_fisher(*lc.model, dataset, c.get_int("fisher.sample_cap"), "linguistic");
    save_fisher(pjoin(dir, "anchor.fisher"), f);

    ManifestInfo info;
    info.subcommand = "fisher";
    info.datasets = {{"corpus", hash_hex(corpus.content_hash())}};
    info.has_final = true;
    info.final_hash = lc.param_hash;
    info.wall_seconds = tm.seconds();
    write_manifest(pjoin(dir, "run.txt"), c, info);

    kv_int("fisher_samples", f.n_samples);
    kv("fisher_file", pjoin(dir, "anchor.fisher"));
}

namespace {

struct InjectOutcome {
    std::unique_ptr<Model> model;
    TrainResult result;
    uint64_t dataset_hash = 0;
    uint64_t anchor_hash = 0;
};

// Shared by the standalone inject phase and every sweep sub-run: loads the
// anchor, tunes it on the subsampled arithmetic set, writes checkpoint,
// metrics and manifest into `dir`.
InjectOutcome inject_into(const PipelineContext& ctx, const Config& c, const std::string& dir) {
    Timer tm;
    LoadedCheckpoint lc = load_checkpoint(pretrain_ckpt(ctx));
    Model& model = *lc.model;

    LoadedDataset ds = load_dataset(dataset_path(ctx, "train"));
    const auto sub =
        subsample(ds.examples, c.get_double("data.subsample_fraction"), c.get_seed("data.seed"));
    require(!sub.empty(), Status::bad_config, "inject: subsample produced no training examples");
    const auto instances = arithmetic_instances(sub, model.vocab(), model.config().max_seq_len);

    TrainOptions opt;
    opt.epochs = static_cast<int>(c.get_int("train.epochs"));
    opt.batch_size = static_cast<int>(c.get_int("train.batch_size"));
    opt.adam.learning_rate = c.get_double("train.learning_rate");
    opt.clip_norm = c.get_double("train.clip_norm");
    opt.lambda1 = lambda1_of(c);
    opt.lambda2 = c.get_double("train.lambda2");
    opt.reg_mode = reg_mode_of(c);
    opt.reg_cap = c.get_double("train.reg_cap");
    opt.ce_only = ce_only_of(c);
    opt.seed = c.get_seed("train.seed");

    std::vector<float> anchor_theta;
    FisherScores anchor_fisher;
    if (opt.lambda2 > 0.0) {
        anchor_theta.assign(model.params().values(),
                            model.params().values() + model.params().count());
        anchor_fisher = load_fisher(anchor_fisher_path(ctx));
        require(anchor_fisher.manifest == model.params().manifest_text(), Status::hash_mismatch,
                "inject: anchor fisher manifest does not match the checkpoint");
        require(anchor_fisher.model_hash == lc.param_hash, Status::hash_mismatch,
                "inject: anchor fisher was computed for a different checkpoint");
        opt.anchor = anchor_theta.data();
        opt.fisher = anchor_fisher.values.data();
    }

    TrainResult result = train_loop(model, fixed_provider(instances), opt);

    const Provenance prov{{"phase", "inject"},
                          {"anchor_hash", hash_hex(lc.param_hash)},
                          {"lambda2", fmt_double(opt.lambda2)},
                          {"code_version", kCodeVersion}};
    save_checkpoint(pjoin(dir, "checkpoint.ckpt"), model, prov);
    write_file(pjoin(dir, "metrics.csv"), metrics_csv_text(result));

    ManifestInfo info;
    info.subcommand = "inject";
    info.datasets = {{"train", hash_hex(ds.manifest.content_hash)}};
    info.training = &result;
    info.has_final = true;
    info.final_hash = model.params().value_hash();
    info.wall_seconds = tm.seconds();
    write_manifest(pjoin(dir, "run.txt"), c, info);

    InjectOutcome out;
    out.model = std::move(lc.model);
    out.result = std::move(result);
    out.dataset_hash = ds.manifest.content_hash;
    out.anchor_hash = lc.param_hash;
    return out;
}

}  // namespace

void run_inject(const PipelineContext& ctx) {
    const std::string dir = pjoin(ctx.out_root, "inject");
    InjectOutcome out = inject_into(ctx, ctx.config, dir);
    if (!out.result.epochs.empty()) {
        kv("inject_final_ce", out.result.epochs.back().mean.ce);
        kv("inject_final_lambda1", out.result.final_lambda1);
    }
    kv("inject_checkpoint", pjoin(dir, "checkpoint.ckpt"));
}

void run_sweep(const PipelineContext& ctx) {
    Timer tm;
    const Config& c = ctx.config;
    const std::string dir = pjoin(ctx.out_root, "sweep");
    const auto grid = c.get_grid("sweep.grid");
    const double converge_ce = c.get_double("sweep.converge_ce");

    const Corpus corpus = load_corpus(c);
    const size_t heldout = corpus.heldout_begin(c.get_double("corpus.heldout_fraction"));
    const double mask_fraction = c.get_double("corpus.mask_fraction");
    const uint64_t probe_seed = seed_for(corpus.content_hash(), "probe");

    LoadedCheckpoint anchor = load_checkpoint(pretrain_ckpt(ctx));
    const RetentionEntry anchor_probe = retention_probe(*anchor.model, corpus, mask_fraction,
                                                        probe_seed, heldout, corpus.n_windows());
    LoadedDataset val = load_dataset(dataset_path(ctx, "val"));

    struct Row {
        double lambda2 = 0.0;
        bool ok = false;
        bool converged = false;
        double final_ce = std::numeric_limits<double>::quiet_NaN();
        double val_accuracy = std::numeric_limits<double>::quiet_NaN();
        double retention_accuracy = std::numeric_limits<double>::quiet_NaN();
        double retention_delta = std::numeric_limits<double>::quiet_NaN();
        std::string error;
    };
    std::vector<Row> rows;

    for (const double v : grid) {
        Row row;
        row.lambda2 = v;
        Config sub_cfg = c;
        sub_cfg.set("train.lambda2", fmt_double(v));
        const std::string sub_dir = pjoin(dir, "lambda2_" + fmt_double(v));
        try {
            InjectOutcome out = inject_into(ctx, sub_cfg, sub_dir);
            row.ok = true;
            if (!out.result.epochs.empty()) {
                row.final_ce = out.result.epochs.back().mean.ce;
                row.converged = row.final_ce <= converge_ce;
            }
            const RangeResult r = exact_match_eval(*out.model, val.examples, "val");
            row.val_accuracy = r.accuracy();
            const RetentionEntry cur = retention_probe(*out.model, corpus, mask_fraction,
                                                       probe_seed, heldout, corpus.n_windows());
            const RetentionReport rep = retention_compare(anchor_probe, cur);
            row.retention_accuracy = cur.accuracy;
            row.retention_delta = rep.accuracy_delta;
            note(ctx, "sweep: lambda2 " + fmt_double(v) + (row.converged ? " converged" : " did not converge") +
                          ", val accuracy " + fmt_double(row.val_accuracy) + ", retention delta " +
                          fmt_double(row.retention_delta));
        } catch (const Error& e) {
            row.error = e.what();
            note(ctx, "sweep: lambda2 " + fmt_double(v) + " failed: " + row.error);
        }
        rows.push_back(std::move(row));
    }

    // Pick the strongest anchoring that still lets the arithmetic loss
    // converge: the largest grid value whose run finished under the CE gate.
    int selected = -1;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].ok || !rows[i].converged) continue;
        if (selected < 0 || rows[i].lambda2 > rows[static_cast<size_t>(selected)].lambda2)
            selected = static_cast<int>(i);
    }

    std::string csv =
        "lambda2,status,converged,final_ce,val_accuracy,retention_accuracy,retention_delta,"
        "selected\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        csv += fmt_double(r.lambda2);
        csv += r.ok ? ",ok," : ",error,";
        csv += r.converged ? "1," : "0,";
        csv += (r.ok ? fmt_double(r.final_ce) : std::string()) + ",";
        csv += (r.ok ? fmt_double(r.val_accuracy) : std::string()) + ",";
        csv += (r.ok ? fmt_double(r.retention_accuracy) : std::string()) + ",";
        csv += (r.ok ? fmt_double(r.retention_delta) : std::string()) + ",";
        csv += (static_cast<int>(i) == selected) ? "1\n" : "0\n";
    }
    write_file(pjoin(dir, "summary.csv"), csv);

    ManifestInfo info;
    info.subcommand = "sweep";
    info.datasets = {{"val", hash_hex(val.manifest.content_hash)},
                     {"corpus", hash_hex(corpus.content_hash())}};
    info.wall_seconds = tm.seconds();
    write_manifest(pjoin(dir, "run.txt"), c, info);

    kv("sweep_selected_lambda2",
       selected >= 0 ? fmt_double(rows[static_cast<size_t>(selected)].lambda2)
                     : std::string("none"));
    kv("sweep_summary", pjoin(dir, "summary.csv"));
}

void run_eval(const PipelineContext& ctx, const std::string& checkpoint_path) {
    Timer tm;
    const Config& c = ctx.config;
    const std::string dir = pjoin(ctx.out_root, "eval");
    const std::string ckpt = checkpoint_path.empty()
                                 ? pjoin(ctx.out_root, pjoin("inject", "checkpoint.ckpt"))
                                 : checkpoint_path;

    LoadedCheckpoint lc = load_checkpoint(ckpt);
    Model& model = *lc.model;

    ManifestInfo info;
    info.subcommand = "eval";

    EvalReport report;
    std::vector<ArithmeticExample> val_examples;
    const char* ranges[4] = {"val", "ood_a", "ood_b", "ood_c"};
    for (const char* name : ranges) {
        LoadedDataset ds = load_dataset(dataset_path(ctx, name));
        RangeResult r = exact_match_eval(model, ds.examples, name);
        info.datasets.push_back({name, hash_hex(ds.manifest.content_hash)});
        const MagnitudeHistogram h = magnitude_histogram(r.predictions, r.targets);
        write_file(pjoin(dir, std::string("histogram_") + name + ".csv"), histogram_csv(h));
        kv(std::string(name) + "_accuracy", r.accuracy());
        kv(std::string(name) + "_parse_failure_rate", r.parse_failure_rate());
        if (std::string(name) == "val") val_examples = std::move(ds.examples);
        report.ranges.push_back(std::move(r));
    }
    write_file(pjoin(dir, "accuracy.csv"), accuracy_csv(report));

    const Corpus corpus = load_corpus(c);
    const size_t heldout = corpus.heldout_begin(c.get_double("corpus.heldout_fraction"));
    const double mask_fraction = c.get_double("corpus.mask_fraction");
    const uint64_t probe_seed = seed_for(corpus.content_hash(), "probe");
    LoadedCheckpoint anchor = load_checkpoint(pretrain_ckpt(ctx));
    const RetentionEntry anchor_probe = retention_probe(*anchor.model, corpus, mask_fraction,
                                                        probe_seed, heldout, corpus.n_windows());
    const RetentionEntry current_probe =
        retention_probe(model, corpus, mask_fraction, probe_seed, heldout, corpus.n_windows());
    const RetentionReport retention = retention_compare(anchor_probe, current_probe);
    write_file(pjoin(dir, "retention.csv"), retention_csv(retention));
    info.datasets.push_back({"corpus", hash_hex(corpus.content_hash())});
    kv("retention_anchor_accuracy", anchor_probe.accuracy);
    kv("retention_accuracy", current_probe.accuracy);
    kv("retention_delta", retention.accuracy_delta);
    kv("retention_ce_delta", retention.ce_delta);

    const auto lines =
        qualitative_lines(model, val_examples, static_cast<int>(c.get_int("eval.qualitative_count")));
    std::string q;
    for (const auto& line : lines) q += line + "\n";
    write_file(pjoin(dir, "qualitative.txt"), q);

    info.has_final = true;
    info.final_hash = model.params().value_hash();
    info.wall_seconds = tm.seconds();
    write_manifest(pjoin(dir, "run.txt"), c, info);
}

void run_overlap(const PipelineContext& ctx, size_t top_n) {
    Timer tm;
    const Config& c = ctx.config;
    const std::string dir = pjoin(ctx.out_root, "overlap");

    LoadedCheckpoint lc = load_checkpoint(pretrain_ckpt(ctx));
    Model& model = *lc.model;
    const FisherScores base = load_fisher(anchor_fisher_path(ctx));
    require(base.manifest == model.params().manifest_text(), Status::hash_mismatch,
            "overlap: anchor fisher manifest does not match the checkpoint");
    require(base.model_hash == lc.param_hash, Status::hash_mismatch,
            "overlap: anchor fisher was computed for a different checkpoint");

    LoadedDataset train = load_dataset(dataset_path(ctx, "train"));
    const auto sub = subsample(train.examples, c.get_double("data.subsample_fraction"),
                               c.get_seed("data.seed"));
    LoadedDataset val = load_dataset(dataset_path(ctx, "val"));

    const auto masked_of = [&](const std::vector<ArithmeticExample>& examples) {
        std::vector<MaskedInstance> out;
        out.reserve(examples.size());
        for (const auto& ex : examples)
            out.push_back(mask_result(ex, model.vocab(), model.config().max_seq_len));
        return out;
    };
    const long long cap = c.get_int("fisher.sample_cap");
    const FisherScores arith_train =
        estimate_fisher(model, masked_of(sub), cap, "arithmetic_train");
    const FisherScores arith_val =
        estimate_fisher(model, masked_of(val.examples), cap, "arithmetic_val");
    save_fisher(pjoin(dir, "arithmetic_train.fisher"), arith_train);
    save_fisher(pjoin(dir, "arithmetic_val.fisher"), arith_val);

    const OverlapReport rep = cross_task_overlap(base, {arith_train, arith_val}, top_n,
                                                 model.params().layer_groups());
    write_file(pjoin(dir, "overlap.csv"), overlap_csv(rep));

    ManifestInfo info;
    info.subcommand = "overlap";
    info.datasets = {{"train", hash_hex(train.manifest.content_hash)},
                     {"val", hash_hex(val.manifest.content_hash)}};
    info.has_final = true;
    info.final_hash = lc.param_hash;
    info.wall_seconds = tm.seconds();
    write_manifest(pjoin(dir, "run.txt"), c, info);

    kv_int("overlap_layers", static_cast<long long>(rep.layers.size()));
    kv("overlap_csv", pjoin(dir, "overlap.csv"));
}

void run_reproduce(const PipelineContext& ctx) {
    note(ctx, "reproduce 1/7: gen-data");
    run_gen_data(ctx);
    note(ctx, "reproduce 2/7: pretrain");
    run_pretrain(ctx);
    note(ctx, "reproduce 3/7: fisher");
    run_fisher(ctx);
    note(ctx, "reproduce 4/7: inject");
    run_inject(ctx);
    note(ctx, "reproduce 5/7: eval");
    run_eval(ctx);
    note(ctx, "reproduce 6/7: sweep");
    run_sweep(ctx);
    note(ctx, "reproduce 7/7: overlap");
    run_overlap(ctx);
}

} // namespace ewclab
