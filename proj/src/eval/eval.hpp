#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "data/corpus.hpp"
#include "data/gen.hpp"
#include "model/encoder.hpp"

namespace ewclab {

// How one decoded prediction scores against the canonical target string.
// Only the exact canonical form matches; anything that is not itself a
// canonical numeral additionally counts as a parse failure.
struct MatchOutcome {
    bool match = false;
    bool parse_failure = false;
};

MatchOutcome score_prediction(const std::string& prediction, const std::string& canonical_target,
                              int decimal_places);

struct RangeResult {
    std::string label;
    long long count = 0;
    long long matches = 0;
    long long parse_failures = 0;
    std::vector<std::string> predictions;  // decoded strings, order of the dataset
    std::vector<std::string> targets;      // canonical renderings

    double accuracy() const { return static_cast<double>(matches) / static_cast<double>(count); }
    double parse_failure_rate() const {
        return static_cast<double>(parse_failures) / static_cast<double>(count);
    }
};

// Greedy-decode the masked result span of every example and compare exact
// canonical strings. Control symbols in a prediction render as their bracket
// names, which can never match a canonical numeral.
RangeResult exact_match_eval(Model& model, const std::vector<ArithmeticExample>& examples,
                             const std::string& label);

struct EvalReport {
    std::vector<RangeResult> ranges;
};

std::string accuracy_csv(const EvalReport& report);

// Order-of-magnitude distribution of predictions vs targets. Decades follow
// the numeral convention used everywhere here: digit-wise decade with zero
// values pinned to -2 and a floor of -2.
struct MagnitudeHistogram {
    std::map<int, long long> pred_decades;
    std::map<int, long long> target_decades;
    long long unparseable = 0;

    int modal_pred_decade() const;    // ties break to the lower decade
    int modal_target_decade() const;
};

MagnitudeHistogram magnitude_histogram(const std::vector<std::string>& predictions,
                                       const std::vector<std::string>& targets);

std::string histogram_csv(const MagnitudeHistogram& h);

// Masked-character accuracy and mean cross-entropy over a fixed seeded
// masking of a window range. The mask fingerprint travels with the numbers so
// comparisons can prove they probed the same layout.
struct RetentionEntry {
    double accuracy = 0.0;
    double mean_ce = 0.0;
    long long positions = 0;
    uint64_t mask_hash = 0;
};

RetentionEntry retention_probe(Model& model, const Corpus& corpus, double mask_fraction,
                               uint64_t seed, size_t window_begin, size_t window_end);

struct RetentionReport {
    RetentionEntry anchor;
    RetentionEntry current;
    double accuracy_delta = 0.0;  // current - anchor
    double ce_delta = 0.0;
};

RetentionReport retention_compare(const RetentionEntry& anchor, const RetentionEntry& current);

std::string retention_csv(const RetentionReport& report);

// Cross-seed summary: one row per metric, one column per run, then the mean,
// the population standard deviation, and the 1-based index of the largest
// value (ties to the earliest run).
struct RunMetrics {
    std::string run_id;
    std::vector<std::pair<std::string, double>> metrics;
};

struct CompareTable {
    std::vector<std::string> run_ids;
    std::vector<std::string> metrics;
    std::vector<std::vector<double>> values;  // [metric][run]
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<size_t> best;

    std::string csv() const;
};

CompareTable compare_runs(const std::vector<RunMetrics>& runs);

// "prompt -> prediction | target" lines, the masked span shown as underscores.
std::vector<std::string> qualitative_lines(Model& model,
                                           const std::vector<ArithmeticExample>& examples,
                                           long long k);

} // namespace ewclab
