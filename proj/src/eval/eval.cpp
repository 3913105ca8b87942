#include "eval/eval.hpp"

#include <algorithm>
#include <cmath>

#include "loss/losses.hpp"
#include "util/fmt.hpp"
#include "util/status.hpp"

namespace ewclab {

MatchOutcome score_prediction(const std::string& prediction, const std::string& canonical_target,
                              int decimal_places) {
    MatchOutcome out;
    out.match = prediction == canonical_target;
    out.parse_failure = !parse_canonical(prediction, decimal_places).has_value();
    return out;
}

RangeResult exact_match_eval(Model& model, const std::vector<ArithmeticExample>& examples,
                             const std::string& label) {
    require(!examples.empty(), Status::bad_config, "eval: no examples for range " + label);
    const BoundParams bound = model.bind_main();
    const Vocabulary& vocab = model.vocab();

    RangeResult r;
    r.label = label;
    r.count = static_cast<long long>(examples.size());
    for (const ArithmeticExample& ex : examples) {
        MaskedInstance mi = mask_result(ex, vocab, model.config().max_seq_len);
        Tensor logits = model.forward(nullptr, bound, mi.input_ids);
        std::vector<int> ids = Model::predict_masked(logits, mi.positions);
        std::string pred;
        for (int id : ids) {
            if (vocab.is_control(id)) pred += vocab.name_of(id);
            else pred += vocab.char_of(id);
        }
        std::string target = ex.result.render();
        MatchOutcome mo = score_prediction(pred, target, ex.result.places);
        r.matches += mo.match ? 1 : 0;
        r.parse_failures += mo.parse_failure ? 1 : 0;
        r.predictions.push_back(std::move(pred));
        r.targets.push_back(std::move(target));
    }
    return r;
}

std::string accuracy_csv(const EvalReport& report) {
    std::string out = "range,count,matches,accuracy,parse_failures,parse_failure_rate\n";
    for (const RangeResult& r : report.ranges) {
        out += r.label + "," + strf("%lld", r.count) + "," + strf("%lld", r.matches) + "," +
               fmt_double(r.accuracy()) + "," + strf("%lld", r.parse_failures) + "," +
               fmt_double(r.parse_failure_rate()) + "\n";
    }
    return out;
}

namespace {

int modal_decade(const std::map<int, long long>& decades, const char* which) {
    require(!decades.empty(), Status::bad_config,
            strf("histogram: no parsed %s to take a mode over", which));
    int best = decades.begin()->first;
    long long best_count = decades.begin()->second;
    for (const auto& [d, c] : decades) {
        if (c > best_count) {
            best = d;
            best_count = c;
        }
    }
    return best;
}

} // namespace

int MagnitudeHistogram::modal_pred_decade() const {
    return modal_decade(pred_decades, "predictions");
}

int MagnitudeHistogram::modal_target_decade() const {
    return modal_decade(target_decades, "targets");
}

MagnitudeHistogram magnitude_histogram(const std::vector<std::string>& predictions,
                                       const std::vector<std::string>& targets) {
    MagnitudeHistogram h;
    for (const std::string& p : predictions) {
        std::optional<LenientValue> v = parse_lenient(p);
        if (v.has_value()) ++h.pred_decades[v->decade];
        else ++h.unparseable;
    }
    for (const std::string& t : targets) {
        std::optional<LenientValue> v = parse_lenient(t);
        require(v.has_value(), Status::internal, "histogram: unparseable target \"" + t + "\"");
        ++h.target_decades[v->decade];
    }
    return h;
}

std::string histogram_csv(const MagnitudeHistogram& h) {
    std::map<int, std::pair<long long, long long>> rows;
    for (const auto& [d, c] : h.pred_decades) rows[d].first = c;
    for (const auto& [d, c] : h.target_decades) rows[d].second = c;
    std::string out = "decade,predictions,targets\n";
    for (const auto& [d, pc] : rows)
        out += strf("%d,%lld,%lld\n", d, pc.first, pc.second);
    out += strf("unparseable,%lld,0\n", h.unparseable);
    return out;
}

RetentionEntry retention_probe(Model& model, const Corpus& corpus, double mask_fraction,
                               uint64_t seed, size_t window_begin, size_t window_end) {
    require(window_begin < window_end && window_end <= corpus.n_windows(), Status::bad_config,
            strf("retention: window range [%zu, %zu) outside [0, %zu)", window_begin, window_end,
                 corpus.n_windows()));
    const BoundParams bound = model.bind_main();
    const Vocabulary& vocab = model.vocab();

    long long correct = 0, total = 0;
    double ce_sum = 0.0;
    for (size_t i = window_begin; i < window_end; ++i) {
        MaskedInstance mi = mask_window(corpus, i, vocab, mask_fraction, seed);
        if (mi.positions.empty()) continue;
        Tensor logits = model.forward(nullptr, bound, mi.input_ids);
        std::vector<int> pred = Model::predict_masked(logits, mi.positions);
        for (size_t j = 0; j < pred.size(); ++j)
            if (pred[j] == mi.target_ids[j]) ++correct;
        ce_sum += masked_ce(nullptr, logits, mi.positions, mi.target_ids).value;
        total += static_cast<long long>(mi.positions.size());
    }
    require(total > 0, Status::bad_config, "retention: nothing maskable in the probe range");

    RetentionEntry e;
    e.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    e.mean_ce = ce_sum / static_cast<double>(total);
    e.positions = total;
    e.mask_hash = mask_manifest_hash(corpus, vocab, mask_fraction, seed, window_begin, window_end);
    return e;
}

RetentionReport retention_compare(const RetentionEntry& anchor, const RetentionEntry& current) {
    require(anchor.mask_hash == current.mask_hash && anchor.positions == current.positions,
            Status::bad_config, "retention: probes measured different mask layouts");
    RetentionReport r;
    r.anchor = anchor;
    r.current = current;
    r.accuracy_delta = current.accuracy - anchor.accuracy;
    r.ce_delta = current.mean_ce - anchor.mean_ce;
    return r;
}

std::string retention_csv(const RetentionReport& report) {
    std::string out = "row,accuracy,mean_ce,positions\n";
    out += "anchor," + fmt_double(report.anchor.accuracy) + "," +
           fmt_double(report.anchor.mean_ce) + "," + strf("%lld", report.anchor.positions) + "\n";
    out += "current," + fmt_double(report.current.accuracy) + "," +
           fmt_double(report.current.mean_ce) + "," + strf("%lld", report.current.positions) +
           "\n";
    out += "delta," + fmt_double(report.accuracy_delta) + "," + fmt_double(report.ce_delta) +
           ",0\n";
    return out;
}

CompareTable compare_runs(const std::vector<RunMetrics>& runs) {
    require(!runs.empty(), Status::bad_config, "compare: no runs");
    CompareTable t;
    for (const RunMetrics& r : runs) t.run_ids.push_back(r.run_id);
    for (const auto& [name, _] : runs[0].metrics) t.metrics.push_back(name);
    for (const RunMetrics& r : runs) {
        require(r.metrics.size() == t.metrics.size(), Status::bad_config,
                "compare: runs report different metric sets");
        for (size_t m = 0; m < t.metrics.size(); ++m)
            require(r.metrics[m].first == t.metrics[m], Status::bad_config,
                    strf("compare: run %s reports metric \"%s\" where \"%s\" was expected",
                         r.run_id.c_str(), r.metrics[m].first.c_str(), t.metrics[m].c_str()));
    }

    size_t n = runs.size();
    for (size_t m = 0; m < t.metrics.size(); ++m) {
        std::vector<double> row;
        row.reserve(n);
        for (const RunMetrics& r : runs) row.push_back(r.metrics[m].second);
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : row) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);  // population convention
        size_t best = 0;
        for (size_t r = 1; r < n; ++r)
            if (row[r] > row[best]) best = r;
        t.values.push_back(std::move(row));
        t.mean.push_back(mean);
        t.stddev.push_back(std::sqrt(var));
        t.best.push_back(best + 1);
    }
    return t;
}

std::string CompareTable::csv() const {
    std::string out = "metric";
    for (const std::string& id : run_ids) out += "," + id;
    out += ",mean,std,best\n";
    for (size_t m = 0; m < metrics.size(); ++m) {
        out += metrics[m];
        for (double v : values[m]) out += "," + fmt_double(v);
        out += "," + fmt_double(mean[m]) + "," + fmt_double(stddev[m]) + "," +
               strf("%zu", best[m]) + "\n";
    }
    return out;
}

std::vector<std::string> qualitative_lines(Model& model,
                                           const std::vector<ArithmeticExample>& examples,
                                           long long k) {
    require(k >= 0, Status::bad_config, strf("qualitative: k = %lld", k));
    size_t take = std::min(static_cast<size_t>(k), examples.size());
    std::vector<ArithmeticExample> head(examples.begin(),
                                        examples.begin() + static_cast<long>(take));
    std::vector<std::string> lines;
    if (head.empty()) return lines;
    RangeResult r = exact_match_eval(model, head, "qualitative");
    for (size_t i = 0; i < head.size(); ++i) {
        const ArithmeticExample& ex = head[i];
        std::string prompt = ex.text;
        for (int j = 0; j < ex.span_len; ++j)
            prompt[static_cast<size_t>(ex.span_begin + j)] = '_';
        lines.push_back(prompt + " -> " + r.predictions[i] + " | " + r.targets[i]);
    }
    return lines;
}

} // namespace ewclab
