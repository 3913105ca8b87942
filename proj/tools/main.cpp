#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ewclab.h"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string seed;
    bool quiet = false;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Configuration file of 'key = value' lines");
    cmd->add_option("--out", args.out_dir, "Output directory (falls back to $EWCLAB_OUT)");
    cmd->add_option("--seed", args.seed,
                    "Run seed shorthand: sets model.seed and train.seed (data.seed is separate)");
    cmd->add_flag("--quiet", args.quiet, "Suppress progress lines; keep key=value output");
    cmd->add_option("overrides", args.overrides, "key=value configuration overrides");
}

int fail(ewclab_session* s, ewclab_status st) {
    std::fprintf(stderr, "ewclab: %s\n", ewclab_last_error(s));
    return static_cast<int>(st);
}

// Returns 0 or the process exit code. Order: config file, then the --seed
// shorthand, then explicit key=value overrides (so overrides win). gen-data
// seeds generation itself; every other phase seeds the model and training.
int apply_common(ewclab_session* s, const CommonArgs& args, bool seeds_data) {
    if (!args.config_path.empty()) {
        const ewclab_status st = ewclab_config_load(s, args.config_path.c_str());
        if (st != EWCLAB_OK) return fail(s, st);
    }
    if (!args.seed.empty()) {
        ewclab_status st = EWCLAB_OK;
        if (seeds_data) {
            st = ewclab_config_set(s, "data.seed", args.seed.c_str());
        } else {
            st = ewclab_config_set(s, "model.seed", args.seed.c_str());
            if (st == EWCLAB_OK) st = ewclab_config_set(s, "train.seed", args.seed.c_str());
        }
        if (st != EWCLAB_OK) return fail(s, st);
    }
    for (const auto& ov : args.overrides) {
        const ewclab_status st = ewclab_config_override(s, ov.c_str());
        if (st != EWCLAB_OK) return fail(s, st);
    }

    std::string out = args.out_dir;
    if (out.empty()) {
        const char* env = std::getenv("EWCLAB_OUT");
        if (env != nullptr) out = env;
    }
    if (out.empty()) {
        std::fprintf(stderr,
                     "ewclab: no output directory\n"
                     "usage: ewclab <subcommand> --out DIR [--config FILE] [--seed N] [--quiet]"
                     " [key=value ...]\n"
                     "       (or set EWCLAB_OUT)\n");
        return static_cast<int>(EWCLAB_BAD_CONFIG);
    }
    const ewclab_status st = ewclab_set_out_dir(s, out.c_str());
    if (st != EWCLAB_OK) return fail(s, st);
    ewclab_set_quiet(s, args.quiet ? 1 : 0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Masked language model arithmetic skill injection laboratory"};
    app.set_version_flag("--version", ewclab_version());
    app.require_subcommand(1);

    CommonArgs a_gen, a_pre, a_fis, a_inj, a_swp, a_evl, a_ovl, a_rep;
    std::string eval_checkpoint;
    std::string gen_count, inject_lambda2;
    long long overlap_n = 800;

    CLI::App* c_gen = app.add_subcommand("gen-data", "Generate the arithmetic datasets");
    add_common(c_gen, a_gen);
    c_gen->add_option("--count", gen_count, "In-domain example count (data.count)");
    CLI::App* c_pre = app.add_subcommand("pretrain", "Train the language model on the corpus");
    add_common(c_pre, a_pre);
    CLI::App* c_fis =
        app.add_subcommand("fisher", "Estimate anchor Fisher scores for the pretrained model");
    add_common(c_fis, a_fis);
    CLI::App* c_inj =
        app.add_subcommand("inject", "Fine-tune the pretrained model on arithmetic");
    add_common(c_inj, a_inj);
    c_inj->add_option("--lambda2", inject_lambda2, "Anchoring strength (train.lambda2)");
    CLI::App* c_swp = app.add_subcommand("sweep", "Sweep the anchoring strength grid");
    add_common(c_swp, a_swp);
    CLI::App* c_evl = app.add_subcommand("eval", "Evaluate a checkpoint on all datasets");
    add_common(c_evl, a_evl);
    c_evl->add_option("--checkpoint", eval_checkpoint,
                      "Checkpoint to evaluate (default: the inject checkpoint)");
    CLI::App* c_ovl = app.add_subcommand("overlap", "Cross-task Fisher overlap report");
    add_common(c_ovl, a_ovl);
    c_ovl->add_option("--n", overlap_n, "Top parameters per layer group (default 800)");
    CLI::App* c_rep = app.add_subcommand("reproduce", "Run every phase in order");
    add_common(c_rep, a_rep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(EWCLAB_BAD_CONFIG);
    }

    ewclab_session* s = ewclab_session_new();
    if (s == nullptr) {
        std::fprintf(stderr, "ewclab: out of memory\n");
        return static_cast<int>(EWCLAB_INTERNAL);
    }

    // Convenience flags become overrides ahead of the positional ones, so an
    // explicit key=value always wins.
    if (!gen_count.empty())
        a_gen.overrides.insert(a_gen.overrides.begin(), "data.count=" + gen_count);
    if (!inject_lambda2.empty())
        a_inj.overrides.insert(a_inj.overrides.begin(), "train.lambda2=" + inject_lambda2);

    int rc = 0;
    const auto run = [&](const CommonArgs& args, bool seeds_data, auto phase) {
        rc = apply_common(s, args, seeds_data);
        if (rc != 0) return;
        const ewclab_status st = phase();
        if (st != EWCLAB_OK) rc = fail(s, st);
    };

    if (c_gen->parsed()) run(a_gen, true, [&] { return ewclab_gen_data(s); });
    if (c_pre->parsed()) run(a_pre, false, [&] { return ewclab_pretrain(s); });
    if (c_fis->parsed()) run(a_fis, false, [&] { return ewclab_fisher(s); });
    if (c_inj->parsed()) run(a_inj, false, [&] { return ewclab_inject(s); });
    if (c_swp->parsed()) run(a_swp, false, [&] { return ewclab_sweep(s); });
    if (c_evl->parsed())
        run(a_evl, false, [&] {
            return ewclab_eval(s, eval_checkpoint.empty() ? nullptr : eval_checkpoint.c_str());
        });
    if (c_ovl->parsed()) run(a_ovl, false, [&] { return ewclab_overlap(s, overlap_n); });
    if (c_rep->parsed()) run(a_rep, false, [&] { return ewclab_reproduce(s); });

    ewclab_session_free(s);
    return rc;
}
