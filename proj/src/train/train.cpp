#include "train/train.hpp"

#include <cmath>

#include "util/fmt.hpp"
#include "util/hash.hpp"
#include "util/rng.hpp"
#include "util/status.hpp"

namespace ewclab {

TrainInstance arithmetic_instance(const ArithmeticExample& ex, const Vocabulary& vocab,
                                  int max_seq_len) {
    TrainInstance inst;
    inst.masked = mask_result(ex, vocab, max_seq_len);
    inst.place_values = span_place_values(ex);
    inst.y = ex.result.to_double();
    inst.has_value = true;
    return inst;
}

std::vector<TrainInstance> arithmetic_instances(const std::vector<ArithmeticExample>& examples,
                                                const Vocabulary& vocab, int max_seq_len) {
    std::vector<TrainInstance> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) out.push_back(arithmetic_instance(ex, vocab, max_seq_len));
    return out;
}

BatchProvider fixed_provider(std::vector<TrainInstance> instances) {
    return [list = std::move(instances)](int) { return list; };
}

BatchProvider corpus_provider(const Corpus& corpus, const Vocabulary& vocab,
                              double mask_fraction, uint64_t seed,
                              size_t window_begin, size_t window_end) {
    require(window_begin < window_end && window_end <= corpus.n_windows(), Status::bad_config,
            strf("corpus provider: window range [%zu, %zu) outside [0, %zu)",
                 window_begin, window_end, corpus.n_windows()));
    return [&corpus, &vocab, mask_fraction, seed, window_begin, window_end](int epoch) {
        uint64_t epoch_seed = seed_for(seed, "epoch-mask", epoch);
        std::vector<TrainInstance> out;
        out.reserve(window_end - window_begin);
        for (size_t i = window_begin; i < window_end; ++i) {
            TrainInstance inst;
            inst.masked = mask_window(corpus, i, vocab, mask_fraction, epoch_seed);
            if (inst.masked.positions.empty()) continue;  // nothing maskable
            out.push_back(std::move(inst));
        }
        return out;
    };
}

void TrainOptions::validate() const {
    require(epochs >= 0, Status::bad_config, strf("train: epochs = %d", epochs));
    require(batch_size >= 1, Status::bad_config, strf("train: batch_size = %d", batch_size));
    require(std::isfinite(lambda2) && lambda2 >= 0.0, Status::bad_config,
            strf("train: lambda2 = %s", fmt_double(lambda2).c_str()));
    if (lambda2 > 0.0)
        require(anchor != nullptr && fisher != nullptr, Status::bad_config,
                "train: lambda2 > 0 requires an anchor checkpoint and anchor Fisher scores");
}

TrainResult train_loop(Model& model, const BatchProvider& provider, const TrainOptions& opt) {
    opt.validate();

    const size_t n_params = model.params().count();
    float* theta = model.params().values();
    float* grads = model.params().grads();
    const std::vector<int> digit_ids = model.vocab().digit_ids();
    const BoundParams bound = model.bind_main();

    Adam adam(n_params, opt.adam);
    Lambda1Schedule lambda1 = opt.lambda1;
    const bool reg_active =
        !opt.ce_only && !(lambda1.is_constant() && lambda1.value() == 0.0);
    const bool ewc_active = opt.lambda2 > 0.0;

    TrainResult result;
    long long step = 0;

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        std::vector<TrainInstance> instances = provider(epoch);
        require(!instances.empty(), Status::bad_config,
                strf("train: no instances for epoch %d", epoch));
        std::vector<size_t> order =
            permutation(instances.size(), seed_for(opt.seed, "shuffle", epoch));

        double sum_ce = 0.0, sum_reg = 0.0, sum_ewc = 0.0, sum_total = 0.0;
        long long epoch_steps = 0;

        for (size_t batch_begin = 0; batch_begin < order.size();
             batch_begin += static_cast<size_t>(opt.batch_size)) {
            size_t batch_end =
                std::min(order.size(), batch_begin + static_cast<size_t>(opt.batch_size));
            ++step;

            Tape tape;
            std::vector<std::pair<Tensor, double>> roots;
            std::vector<FusedLoss> decodes;
            std::vector<double> y, yhat;
            double ce_sum = 0.0;
            long long masked_total = 0;

            for (size_t k = batch_begin; k < batch_end; ++k) {
                const TrainInstance& inst = instances[order[k]];
                Tensor logits = model.forward(&tape, bound, inst.masked.input_ids);
                FusedLoss ce = masked_ce(&tape, logits, inst.masked.positions,
                                         inst.masked.target_ids);
                ce_sum += ce.value;
                masked_total += static_cast<long long>(inst.masked.positions.size());
                roots.emplace_back(ce.node, 0.0);  // seed filled once masked_total is known
                if (reg_active && inst.has_value) {
                    FusedLoss dec = soft_decode(&tape, logits, inst.masked.positions,
                                                inst.place_values, digit_ids);
                    decodes.push_back(dec);
                    y.push_back(inst.y);
                    yhat.push_back(dec.value);
                }
            }

            double ce_mean = ce_sum / static_cast<double>(masked_total);
            for (auto& root : roots) root.second = 1.0 / static_cast<double>(masked_total);

            double reg_value = 0.0;
            RegResult rr;
            if (reg_active && !yhat.empty()) {
                rr = reg_loss(y, yhat, opt.reg_mode, opt.reg_cap);
                reg_value = rr.value;
                for (size_t i = 0; i < decodes.size(); ++i)
                    roots.emplace_back(decodes[i].node, lambda1.value() * rr.dvalue_dyhat[i]);
            }

            double ewc = ewc_active ? ewc_value(theta, opt.anchor, opt.fisher, n_params) : 0.0;

            LossBreakdown bd =
                total_loss(ce_mean, reg_value, ewc, lambda1.value(), opt.lambda2);
            require(std::isfinite(bd.total), Status::non_finite,
                    strf("train: non-finite loss at step %lld (epoch %d)", step, epoch));

            model.params().zero_grads();
            tape.backward_seeded(roots);
            if (ewc_active) ewc_add_grad(theta, opt.anchor, opt.fisher, n_params,
                                         opt.lambda2, grads);
            clip_global_norm(grads, n_params, opt.clip_norm);
            adam.step(theta, grads);

            result.steps.push_back({step, epoch, bd});
            sum_ce += bd.ce;
            sum_reg += bd.reg;
            sum_ewc += bd.ewc;
            sum_total += bd.total;
            ++epoch_steps;
        }

        double inv = 1.0 / static_cast<double>(epoch_steps);
        LossBreakdown mean;
        mean.ce = sum_ce * inv;
        mean.reg = sum_reg * inv;
        mean.ewc = sum_ewc * inv;
        mean.lambda1 = lambda1.value();
        mean.lambda2 = opt.lambda2;
        mean.total = sum_total * inv;
        result.epochs.push_back({epoch, mean});

        lambda1.update(mean.ce, mean.reg);
    }

    result.final_lambda1 = lambda1.value();
    return result;
}

} // namespace ewclab
