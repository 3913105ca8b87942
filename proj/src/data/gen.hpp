#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "data/decimal.hpp"
#include "model/vocab.hpp"

namespace ewclab {

// Half-open operand interval [lo, hi) in decimal values, 0 < lo < hi.
struct NumeralRange {
    Decimal lo;
    Decimal hi;
    void validate() const;
};

struct GenConfig {
    NumeralRange range;
    std::string operators = "+-";  // subset of {+, -}
    int decimal_places = 2;
    long long count = 0;
    uint64_t seed = 0;
    void validate() const;
};

struct ArithmeticExample {
    Decimal a, b, result;
    char op = '+';
    std::string text;      // canonical "a op b = c", single spaces
    int span_begin = 0;    // character offset of the result c
    int span_len = 0;
};

ArithmeticExample make_example(Decimal a, Decimal b, char op);

// Uniform operands over the range at the configured precision; subtraction
// operands are ordered larger-first so results stay non-negative. Index-seeded
// draws make parallel generation equal to sequential generation.
std::vector<ArithmeticExample> generate(const GenConfig& cfg);

// Inverse of the canonical rendering; rejects anything that does not
// round-trip exactly (including a result that is not the exact evaluation).
std::optional<ArithmeticExample> parse_example(const std::string& line, int decimal_places);

// Deduplicates by text, then splits so validation and training expressions
// are disjoint while operand-magnitude decades (decade of the larger operand)
// appear in both sides proportionally via largest-remainder apportionment.
std::pair<std::vector<ArithmeticExample>, std::vector<ArithmeticExample>> split_stratified(
    const std::vector<ArithmeticExample>& examples, double val_fraction);

// floor(fraction·n) items uniform without replacement, original order kept.
std::vector<ArithmeticExample> subsample(const std::vector<ArithmeticExample>& examples,
                                         double fraction, uint64_t seed);

struct MaskedInstance {
    std::vector<int> input_ids;   // result span replaced by [MASK]
    std::vector<int> target_ids;  // original ids at the masked positions
    std::vector<int> positions;   // ascending
};

MaskedInstance mask_result(const ArithmeticExample& ex, const Vocabulary& vocab,
                           int max_seq_len);

// Place value per result character: powers of ten for digit slots, 0 for the
// point. Used by the differentiable numeral decoding.
std::vector<double> span_place_values(const ArithmeticExample& ex);

} // namespace ewclab
