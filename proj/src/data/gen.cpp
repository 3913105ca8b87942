#include "data/gen.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "util/fmt.hpp"
#include "util/hash.hpp"
#include "util/rng.hpp"

namespace ewclab {

void NumeralRange::validate() const {
    require(lo.places == hi.places, Status::bad_config, "range: lo and hi precision differ");
    require(lo.units > 0, Status::bad_config, "range: lower bound must be positive");
    require(lo.units < hi.units, Status::bad_config,
            strf("range: [%s, %s) is empty", lo.render().c_str(), hi.render().c_str()));
}

void GenConfig::validate() const {
    range.validate();
    require(count > 0, Status::bad_config, "generator: count must be positive");
    require(decimal_places >= 0, Status::bad_config, "generator: negative decimal places");
    require(range.lo.places == decimal_places, Status::bad_config,
            "generator: range precision differs from decimal_places");
    require(!operators.empty(), Status::bad_config, "generator: empty operator set");
    for (char op : operators)
        require(op == '+' || op == '-', Status::bad_config,
                strf("generator: unsupported operator '%c'", op));
}

ArithmeticExample make_example(Decimal a, Decimal b, char op) {
    require(a.places == b.places, Status::internal, "example: operand precision differs");
    ArithmeticExample ex;
    ex.op = op;
    if (op == '-' && b.units > a.units) std::swap(a, b);
    ex.a = a;
    ex.b = b;
    ex.result = Decimal{op == '+' ? a.units + b.units : a.units - b.units, a.places};
    std::string c = ex.result.render();
    ex.text = a.render() + " " + op + " " + b.render() + " = " + c;
    ex.span_len = static_cast<int>(c.size());
    ex.span_begin = static_cast<int>(ex.text.size()) - ex.span_len;
    return ex;
}

std::vector<ArithmeticExample> generate(const GenConfig& cfg) {
    cfg.validate();
    std::vector<ArithmeticExample> out;
    out.reserve(static_cast<size_t>(cfg.count));
    unsigned long long width =
        static_cast<unsigned long long>(cfg.range.hi.units - cfg.range.lo.units);
    for (long long i = 0; i < cfg.count; ++i) {
        Rng rng(seed_for(cfg.seed, "gen", static_cast<uint64_t>(i)));
        Decimal a{cfg.range.lo.units + static_cast<long long>(rng.next_below(width)),
                  cfg.decimal_places};
        Decimal b{cfg.range.lo.units + static_cast<long long>(rng.next_below(width)),
                  cfg.decimal_places};
        char op = cfg.operators[rng.next_below(cfg.operators.size())];
        out.push_back(make_example(a, b, op));
    }
    return out;
}

std::optional<ArithmeticExample> parse_example(const std::string& line, int decimal_places) {
    std::vector<std::string> tok;
    size_t pos = 0;
    while (pos <= line.size()) {
        size_t sp = line.find(' ', pos);
        if (sp == std::string::npos) {
            tok.push_back(line.substr(pos));
            break;
        }
        tok.push_back(line.substr(pos, sp - pos));
        pos = sp + 1;
    }
    if (tok.size() != 5 || tok[3] != "=") return std::nullopt;
    if (tok[1].size() != 1 || (tok[1][0] != '+' && tok[1][0] != '-')) return std::nullopt;
    auto a = parse_canonical(tok[0], decimal_places);
    auto b = parse_canonical(tok[2], decimal_places);
    auto c = parse_canonical(tok[4], decimal_places);
    if (!a || !b || !c) return std::nullopt;
    char op = tok[1][0];
    if (op == '-' && b->units > a->units) return std::nullopt;
    ArithmeticExample ex = make_example(*a, *b, op);
    if (ex.result != *c || ex.text != line) return std::nullopt;
    return ex;
}

std::pair<std::vector<ArithmeticExample>, std::vector<ArithmeticExample>> split_stratified(
    const std::vector<ArithmeticExample>& examples, double val_fraction) {
    require(val_fraction > 0.0 && val_fraction < 1.0, Status::bad_config,
            "split: val_fraction must lie in (0,1)");

    std::vector<const ArithmeticExample*> unique;
    {
        std::unordered_set<std::string> seen;
        for (const auto& ex : examples)
            if (seen.insert(ex.text).second) unique.push_back(&ex);
    }
    size_t n = unique.size();
    size_t n_val = static_cast<size_t>(val_fraction * static_cast<double>(n));
    require(n >= 2 && n_val >= 1 && n - n_val >= 1, Status::bad_config,
            strf("split: %zu unique examples cannot satisfy a %g validation fraction", n,
                 val_fraction));

    // Strata keyed by the decade of the larger operand.
    std::map<int, std::vector<size_t>> strata;
    for (size_t i = 0; i < n; ++i) {
        const auto& ex = *unique[i];
        int decade = decade_of(ex.a.units >= ex.b.units ? ex.a : ex.b);
        strata[decade].push_back(i);
    }

    // Largest-remainder apportionment of the validation quota.
    struct Stratum {
        int decade;
        std::vector<size_t>* items;
        size_t quota;
        double frac;
    };
    std::vector<Stratum> st;
    size_t assigned = 0;
    for (auto& [decade, items] : strata) {
        double exact = static_cast<double>(n_val) * items.size() / static_cast<double>(n);
        size_t quota = static_cast<size_t>(exact);
        st.push_back({decade, &items, quota, exact - static_cast<double>(quota)});
        assigned += quota;
    }
    {
        std::vector<size_t> order(st.size());
        for (size_t i = 0; i < st.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return st[a].frac > st[b].frac; });
        for (size_t k = 0; assigned < n_val; ++k)
            st[order[k % order.size()]].quota += 1, ++assigned;
    }
    // Both splits must see every stratum that has at least two members.
    auto headroom = [](const Stratum& s) {
        return s.items->size() >= 2 ? s.items->size() - 1 : 0;
    };
    long long drift = 0;
    for (auto& s : st) {
        size_t lo = s.items->size() >= 2 ? 1 : 0;
        size_t hi = s.items->size() >= 2 ? s.items->size() - 1 : 0;
        size_t clamped = std::min(std::max(s.quota, lo), hi);
        drift += static_cast<long long>(s.quota) - static_cast<long long>(clamped);
        s.quota = clamped;
    }
    while (drift != 0) {
        bool moved = false;
        for (auto& s : st) {
            if (drift > 0 && s.quota < headroom(s)) {
                s.quota += 1, --drift, moved = true;
            } else if (drift < 0 && s.quota > 1) {
                s.quota -= 1, ++drift, moved = true;
            }
            if (drift == 0) break;
        }
        require(moved, Status::bad_config,
                "split: too few examples to represent every decade in both splits");
    }

    std::vector<bool> to_val(n, false);
    for (auto& s : st) {
        std::vector<size_t> idx = *s.items;
        Rng rng(seed_for(0x57AB1E, "split", static_cast<uint64_t>(s.decade + 100)));
        rng.shuffle(idx);
        for (size_t k = 0; k < s.quota; ++k) to_val[idx[k]] = true;
    }
    std::pair<std::vector<ArithmeticExample>, std::vector<ArithmeticExample>> out;
    for (size_t i = 0; i < n; ++i)
        (to_val[i] ? out.second : out.first).push_back(*unique[i]);
    return out;
}

std::vector<ArithmeticExample> subsample(const std::vector<ArithmeticExample>& examples,
                                         double fraction, uint64_t seed) {
    require(fraction > 0.0 && fraction <= 1.0, Status::bad_config,
            "subsample: fraction must lie in (0,1]");
    size_t n = examples.size();
    size_t k = static_cast<size_t>(fraction * static_cast<double>(n));
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed_for(seed, "subsample"));
    for (size_t i = 0; i < k && n > 0; ++i) {
        size_t j = i + static_cast<size_t>(rng.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::vector<ArithmeticExample> out;
    out.reserve(k);
    for (size_t i : idx) out.push_back(examples[i]);
    return out;
}

MaskedInstance mask_result(const ArithmeticExample& ex, const Vocabulary& vocab,
                           int max_seq_len) {
    require(static_cast<int>(ex.text.size()) <= max_seq_len, Status::bad_config,
            strf("mask: \"%s\" has %zu characters, max_seq_len is %d", ex.text.c_str(),
                 ex.text.size(), max_seq_len));
    MaskedInstance mi;
    mi.input_ids = vocab.encode(ex.text);
    for (int p = ex.span_begin; p < ex.span_begin + ex.span_len; ++p) {
        mi.positions.push_back(p);
        mi.target_ids.push_back(mi.input_ids[static_cast<size_t>(p)]);
        mi.input_ids[static_cast<size_t>(p)] = Vocabulary::kMask;
    }
    return mi;
}

std::vector<double> span_place_values(const ArithmeticExample& ex) {
    std::string c = ex.result.render();
    int places = ex.result.places;
    int int_len = static_cast<int>(c.size()) - (places > 0 ? places + 1 : 0);
    std::vector<double> out;
    out.reserve(c.size());
    for (int j = 0; j < static_cast<int>(c.size()); ++j) {
        if (j < int_len) {
            out.push_back(static_cast<double>(pow10ll(int_len - 1 - j)));
        } else if (j == int_len && places > 0) {
            out.push_back(0.0);  // the point
        } else {
            out.push_back(1.0 / static_cast<double>(pow10ll(j - int_len)));
        }
    }
    return out;
}

} // namespace ewclab
