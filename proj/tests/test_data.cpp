#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_set>

#include "data/corpus.hpp"
#include "data/dataio.hpp"
#include "data/gen.hpp"
#include "util/fs.hpp"

using namespace ewclab;

namespace {

Decimal dec(long long units, int places = 2) { return Decimal{units, places}; }

GenConfig small_config(uint64_t seed, long long count) {
    GenConfig cfg;
    cfg.range = {dec(100), dec(10000000)};  // [1.00, 100000.00)
    cfg.operators = "+-";
    cfg.decimal_places = 2;
    cfg.count = count;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("decimal arithmetic is exact on the scaled integers") {
    // 61176.23 - 46741.95 must come out as 14434.28 with no float drift.
    ArithmeticExample ex = make_example(dec(6117623), dec(4674195), '-');
    CHECK(ex.result == dec(1443428));
    CHECK(ex.text == "61176.23 - 46741.95 = 14434.28");
    CHECK(ex.span_len == 8);
    CHECK(ex.span_begin == 22);
    CHECK(ex.text.substr(22) == "14434.28");
}

TEST_CASE("subtracting a value from itself renders 0.00") {
    ArithmeticExample ex = make_example(dec(517), dec(517), '-');
    CHECK(ex.result.units == 0);
    CHECK(ex.result.render() == "0.00");
    CHECK(ex.text == "5.17 - 5.17 = 0.00");
}

TEST_CASE("subtraction operands are reordered so results are non-negative") {
    ArithmeticExample ex = make_example(dec(100), dec(900), '-');
    CHECK(ex.a == dec(900));
    CHECK(ex.b == dec(100));
    CHECK(ex.text == "9.00 - 1.00 = 8.00");
}

TEST_CASE("canonical rendering and strict parsing") {
    CHECK(dec(1000).render() == "10.00");
    CHECK(dec(5, 2).render() == "0.05");
    CHECK(dec(12345, 0).render() == "12345");

    CHECK(parse_canonical("10.00", 2) == dec(1000));
    CHECK(parse_canonical("0.05", 2) == dec(5));
    CHECK(parse_canonical("12345", 0) == dec(12345, 0));

    // Wrong fraction width, padding, signs, junk: all rejected.
    CHECK(!parse_canonical("5.1", 2));
    CHECK(!parse_canonical("5.100", 2));
    CHECK(!parse_canonical("05.10", 2));
    CHECK(!parse_canonical("-5.10", 2));
    CHECK(!parse_canonical("+5.10", 2));
    CHECK(!parse_canonical("5.1O", 2));
    CHECK(!parse_canonical("", 2));
    CHECK(!parse_canonical(".10", 2));
    CHECK(!parse_canonical("10.00", 0));
    CHECK(!parse_canonical("1000000000000000.00", 2));  // 16 integer digits
}

TEST_CASE("lenient parsing reads any digit string and assigns digit-wise decades") {
    auto v = parse_lenient("14434.28");
    REQUIRE(v);
    CHECK(v->value == doctest::Approx(14434.28));
    CHECK(v->decade == 4);

    CHECK(parse_lenient("9.99")->decade == 0);
    CHECK(parse_lenient("10.00")->decade == 1);
    CHECK(parse_lenient("0.5")->decade == -1);
    CHECK(parse_lenient("0.05")->decade == -2);
    CHECK(parse_lenient("0.005")->decade == -2);  // floored
    CHECK(parse_lenient("0.00")->decade == -2);   // zero
    CHECK(parse_lenient("007")->decade == 0);     // non-canonical but readable
    CHECK(parse_lenient("5")->decade == 0);
    CHECK(parse_lenient(".5")->decade == -1);

    CHECK(!parse_lenient("5.1.0"));
    CHECK(!parse_lenient("abc"));
    CHECK(!parse_lenient(""));
    CHECK(!parse_lenient("."));
    CHECK(!parse_lenient("5-1"));
}

TEST_CASE("decade of a decimal matches the lenient decade of its rendering") {
    for (long long units : {1LL, 5LL, 99LL, 100LL, 1000LL, 999999LL, 1443428LL, 0LL}) {
        Decimal d = dec(units);
        CHECK(decade_of(d) == parse_lenient(d.render())->decade);
    }
}

TEST_CASE("place values follow the digit positions of the result") {
    ArithmeticExample ex = make_example(dec(6117623), dec(4674195), '-');
    std::vector<double> pv = span_place_values(ex);  // 14434.28
    REQUIRE(pv.size() == 8);
    CHECK(pv == std::vector<double>{10000, 1000, 100, 10, 1, 0, 0.1, 0.01});

    ArithmeticExample zero = make_example(dec(517), dec(517), '-');
    CHECK(span_place_values(zero) == std::vector<double>{1, 0, 0.1, 0.01});
}

TEST_CASE("generation respects the operand range and regenerates byte-identically") {
    GenConfig cfg = small_config(7, 500);
    auto ex = generate(cfg);
    REQUIRE(ex.size() == 500);
    bool saw_plus = false, saw_minus = false;
    for (const auto& e : ex) {
        CHECK(e.a.units >= cfg.range.lo.units);
        CHECK(e.a.units < cfg.range.hi.units);
        CHECK(e.b.units >= cfg.range.lo.units);
        CHECK(e.b.units < cfg.range.hi.units);
        (e.op == '+' ? saw_plus : saw_minus) = true;
        if (e.op == '-') CHECK(e.a.units >= e.b.units);
    }
    CHECK(saw_plus);
    CHECK(saw_minus);

    auto again = generate(cfg);
    REQUIRE(again.size() == ex.size());
    for (size_t i = 0; i < ex.size(); ++i) CHECK(again[i].text == ex[i].text);

    GenConfig other = cfg;
    other.seed = 8;
    auto different = generate(other);
    size_t same = 0;
    for (size_t i = 0; i < ex.size(); ++i)
        if (different[i].text == ex[i].text) ++same;
    CHECK(same < 5);
}

TEST_CASE("single-operator configs only emit that operator") {
    GenConfig cfg = small_config(3, 64);
    cfg.operators = "+";
    for (const auto& e : generate(cfg)) CHECK(e.op == '+');
}

TEST_CASE("generator config validation") {
    GenConfig cfg = small_config(1, 10);
    cfg.count = 0;
    CHECK_THROWS_AS(generate(cfg), Error);
    cfg = small_config(1, 10);
    cfg.operators = "*";
    CHECK_THROWS_AS(generate(cfg), Error);
    cfg = small_config(1, 10);
    cfg.range = {dec(500), dec(100)};
    CHECK_THROWS_AS(generate(cfg), Error);
    cfg = small_config(1, 10);
    cfg.range.lo = dec(0);
    CHECK_THROWS_AS(generate(cfg), Error);
}

TEST_CASE("parsing inverts rendering and rejects corrupted lines") {
    auto ex = generate(small_config(11, 50));
    for (const auto& e : ex) {
        auto back = parse_example(e.text, 2);
        REQUIRE(back);
        CHECK(back->text == e.text);
        CHECK(back->a == e.a);
        CHECK(back->b == e.b);
        CHECK(back->result == e.result);
        CHECK(back->op == e.op);
        CHECK(back->span_begin == e.span_begin);
        CHECK(back->span_len == e.span_len);
    }

    CHECK(!parse_example("1.00 + 2.00 = 3.01", 2));   // wrong result
    CHECK(!parse_example("1.00 - 2.00 = -1.00", 2));  // negative result form
    CHECK(!parse_example("1.00 + 2.00 = 3.0", 2));    // wrong width
    CHECK(!parse_example("1.00  + 2.00 = 3.00", 2));  // double space
    CHECK(!parse_example("1.00 * 2.00 = 2.00", 2));   // operator
    CHECK(!parse_example("1.00 + 2.00 3.00", 2));     // missing '='
    CHECK(!parse_example("", 2));
}

TEST_CASE("split deduplicates, partitions without overlap and keeps order") {
    // 100 distinct expressions, duplicated twice over, 10% validation.
    std::vector<ArithmeticExample> ex;
    for (int i = 0; i < 100; ++i) ex.push_back(make_example(dec(100 + i), dec(200), '+'));
    std::vector<ArithmeticExample> doubled = ex;
    doubled.insert(doubled.end(), ex.begin(), ex.end());

    auto [train, val] = split_stratified(doubled, 0.1);
    CHECK(train.size() == 90);
    CHECK(val.size() == 10);

    std::unordered_set<std::string> train_texts, val_texts;
    for (const auto& e : train) train_texts.insert(e.text);
    for (const auto& e : val) val_texts.insert(e.text);
    CHECK(train_texts.size() == 90);
    CHECK(val_texts.size() == 10);
    for (const auto& t : val_texts) CHECK(train_texts.count(t) == 0);

    // Original order within each side.
    auto index_of = [&](const std::string& t) {
        for (size_t i = 0; i < ex.size(); ++i)
            if (ex[i].text == t) return i;
        return ex.size();
    };
    for (size_t i = 1; i < train.size(); ++i)
        CHECK(index_of(train[i - 1].text) < index_of(train[i].text));
    for (size_t i = 1; i < val.size(); ++i)
        CHECK(index_of(val[i - 1].text) < index_of(val[i].text));
}

TEST_CASE("every multi-member magnitude decade lands in both split sides") {
    // Larger-operand decades 0 through 4, five members each.
    std::vector<ArithmeticExample> ex;
    for (int d = 0; d <= 4; ++d) {
        long long base = pow10ll(d + 2);  // units of 10^d
        for (int k = 0; k < 5; ++k)
            ex.push_back(make_example(dec(base + k * 7 + 1), dec(100), '+'));
    }
    auto [train, val] = split_stratified(ex, 0.2);
    CHECK(train.size() + val.size() == ex.size());

    auto decades = [](const std::vector<ArithmeticExample>& v) {
        std::set<int> out;
        for (const auto& e : v)
            out.insert(decade_of(e.a.units >= e.b.units ? e.a : e.b));
        return out;
    };
    std::set<int> want = {0, 1, 2, 3, 4};
    CHECK(decades(train) == want);
    CHECK(decades(val) == want);
}

TEST_CASE("split rejects impossible fractions") {
    std::vector<ArithmeticExample> ex = {make_example(dec(100), dec(200), '+'),
                                         make_example(dec(300), dec(400), '+')};
    CHECK_THROWS_AS(split_stratified(ex, 0.0), Error);
    CHECK_THROWS_AS(split_stratified(ex, 1.0), Error);
    CHECK_THROWS_AS(split_stratified(ex, 0.1), Error);  // floor(0.2) = 0 validation items
}

TEST_CASE("subsampling takes floor(fraction*n) items, order preserved, fraction one is identity") {
    std::vector<ArithmeticExample> big(165000);
    CHECK(subsample(big, 0.25, 5).size() == 41250);

    auto ex = generate(small_config(13, 200));
    auto sub = subsample(ex, 0.25, 42);
    REQUIRE(sub.size() == 50);
    auto again = subsample(ex, 0.25, 42);
    for (size_t i = 0; i < sub.size(); ++i) CHECK(again[i].text == sub[i].text);

    // Subsequence of the original, in original order.
    size_t cursor = 0;
    for (const auto& s : sub) {
        while (cursor < ex.size() && ex[cursor].text != s.text) ++cursor;
        CHECK(cursor < ex.size());
        ++cursor;
    }

    auto all = subsample(ex, 1.0, 42);
    REQUIRE(all.size() == ex.size());
    for (size_t i = 0; i < ex.size(); ++i) CHECK(all[i].text == ex[i].text);

    CHECK_THROWS_AS(subsample(ex, 0.0, 1), Error);
    CHECK_THROWS_AS(subsample(ex, 1.5, 1), Error);
}

TEST_CASE("disjoint operand ranges generate disjoint expression sets") {
    GenConfig in_range = small_config(21, 300);
    in_range.range = {dec(100), dec(1000000)};  // [1.00, 10000.00)
    GenConfig out_range = small_config(22, 300);
    out_range.range = {dec(1000000), dec(10000000)};  // [10000.00, 100000.00)

    std::unordered_set<std::string> in_texts;
    for (const auto& e : generate(in_range)) in_texts.insert(e.text);
    for (const auto& e : generate(out_range)) {
        CHECK(in_texts.count(e.text) == 0);
        CHECK(e.a.units >= 1000000);
        CHECK(e.b.units >= 1000000);
    }
}

TEST_CASE("masking a result covers exactly the span and nothing else") {
    Vocabulary vocab = Vocabulary::arithmetic();
    ArithmeticExample ex = make_example(dec(500), dec(500), '+');
    CHECK(ex.text == "5.00 + 5.00 = 10.00");

    MaskedInstance mi = mask_result(ex, vocab, 64);
    REQUIRE(mi.positions.size() == 5);
    CHECK(mi.positions == std::vector<int>{14, 15, 16, 17, 18});
    CHECK(mi.target_ids.size() == 5);

    std::vector<int> original = vocab.encode(ex.text);
    REQUIRE(mi.input_ids.size() == original.size());
    for (size_t i = 0; i < original.size(); ++i) {
        bool in_span = static_cast<int>(i) >= ex.span_begin;
        if (in_span) {
            CHECK(mi.input_ids[i] == Vocabulary::kMask);
        } else {
            CHECK(mi.input_ids[i] == original[i]);
        }
    }
    // Reversible: writing targets back restores the original encoding.
    std::vector<int> restored = mi.input_ids;
    for (size_t k = 0; k < mi.positions.size(); ++k)
        restored[static_cast<size_t>(mi.positions[k])] = mi.target_ids[k];
    CHECK(restored == original);

    ArithmeticExample too_long = make_example(dec(6117623), dec(4674195), '-');
    CHECK_THROWS_WITH_AS(mask_result(too_long, vocab, 16),
                         "mask: \"61176.23 - 46741.95 = 14434.28\" has 30 characters, "
                         "max_seq_len is 16",
                         Error);
}

TEST_CASE("corpus windowing drops the trailing remainder") {
    std::string text(640, 'a');
    Corpus c = Corpus::from_text(text, 64);
    CHECK(c.n_windows() == 10);
    CHECK(c.window(0).size() == 64);

    Corpus c2 = Corpus::from_text(text + "leftover", 64);
    CHECK(c2.n_windows() == 10);
    CHECK(c2.content_hash() != c.content_hash());

    CHECK_THROWS_AS(Corpus::from_text("short", 64), Error);
    CHECK_THROWS_AS(Corpus::from_text("", 64), Error);
    CHECK_THROWS_AS(Corpus::from_text(text, 0), Error);
}

TEST_CASE("heldout split keeps the tail and always holds at least one window") {
    std::string text(640, 'x');
    Corpus c = Corpus::from_text(text, 64);
    CHECK(c.heldout_begin(0.1) == 9);
    CHECK(c.heldout_begin(0.25) == 8);
    CHECK(c.heldout_begin(0.01) == 9);  // floor 0, bumped to 1 window
    CHECK(c.heldout_begin(0.99) == 1);  // at least one window stays trainable

    Corpus one = Corpus::from_text(std::string(64, 'x'), 64);
    CHECK_THROWS_AS(one.heldout_begin(0.5), Error);  // nothing left to train on
}

TEST_CASE("window masking is seeded, fractional and skips unknown characters") {
    Vocabulary vocab = Vocabulary::arithmetic();
    // 60-char window mixing in-vocabulary digits with letters ([UNK]).
    std::string w;
    for (int i = 0; i < 60; ++i) w += (i % 3 == 0) ? 'z' : static_cast<char>('0' + i % 10);
    Corpus c = Corpus::from_text(w, 60);

    MaskedInstance mi = mask_window(c, 0, vocab, 0.15, 9);
    CHECK(mi.positions.size() == 9);  // floor(0.15 * 60)
    std::vector<int> original = vocab.encode(w);
    for (size_t k = 0; k < mi.positions.size(); ++k) {
        int p = mi.positions[k];
        CHECK(original[static_cast<size_t>(p)] != Vocabulary::kUnk);
        CHECK(mi.input_ids[static_cast<size_t>(p)] == Vocabulary::kMask);
        CHECK(mi.target_ids[k] == original[static_cast<size_t>(p)]);
        if (k > 0) CHECK(mi.positions[k] > mi.positions[k - 1]);
    }
    for (size_t i = 0; i < original.size(); ++i)
        if (std::find(mi.positions.begin(), mi.positions.end(), static_cast<int>(i)) ==
            mi.positions.end())
            CHECK(mi.input_ids[i] == original[i]);

    MaskedInstance repeat = mask_window(c, 0, vocab, 0.15, 9);
    CHECK(repeat.positions == mi.positions);
    MaskedInstance reseeded = mask_window(c, 0, vocab, 0.15, 10);
    CHECK(reseeded.positions != mi.positions);

    // A window with no maskable characters comes back empty.
    Corpus letters = Corpus::from_text(std::string(60, 'q'), 60);
    CHECK(mask_window(letters, 0, vocab, 0.15, 9).positions.empty());
}

TEST_CASE("mask layout fingerprints match exactly when the inputs match") {
    Vocabulary vocab = Vocabulary::arithmetic();
    std::string text;
    for (int i = 0; i < 640; ++i) text += static_cast<char>('0' + i % 10);
    Corpus c = Corpus::from_text(text, 64);

    uint64_t h1 = mask_manifest_hash(c, vocab, 0.15, 9, 8, 10);
    uint64_t h2 = mask_manifest_hash(c, vocab, 0.15, 9, 8, 10);
    CHECK(h1 == h2);
    CHECK(mask_manifest_hash(c, vocab, 0.15, 10, 8, 10) != h1);
    CHECK(mask_manifest_hash(c, vocab, 0.15, 9, 7, 10) != h1);

    Corpus other = Corpus::from_text(text + text.substr(0, 64), 64);
    CHECK(mask_manifest_hash(other, vocab, 0.15, 9, 8, 10) != h1);
}

TEST_CASE("dataset files round-trip through the manifest sidecar") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "ewclab_test_dataio";
    fs::remove_all(dir);
    std::string path = (dir / "train.txt").string();

    GenConfig cfg = small_config(31, 120);
    auto ex = generate(cfg);
    write_dataset(path, "train", ex, cfg);
    CHECK(fs::exists(path));
    CHECK(fs::exists(path + ".manifest"));

    LoadedDataset ld = load_dataset(path);
    CHECK(ld.manifest.label == "train");
    CHECK(ld.manifest.count == 120);
    CHECK(ld.manifest.config.range.lo == cfg.range.lo);
    CHECK(ld.manifest.config.range.hi == cfg.range.hi);
    CHECK(ld.manifest.config.operators == cfg.operators);
    CHECK(ld.manifest.config.seed == cfg.seed);
    REQUIRE(ld.examples.size() == ex.size());
    for (size_t i = 0; i < ex.size(); ++i) {
        CHECK(ld.examples[i].text == ex[i].text);
        CHECK(ld.examples[i].result == ex[i].result);
    }

    // Idempotent rewrite: byte-identical artifacts.
    std::string body = read_file(path), man = read_file(path + ".manifest");
    write_dataset(path, "train", ex, cfg);
    CHECK(read_file(path) == body);
    CHECK(read_file(path + ".manifest") == man);

    SUBCASE("content tampering is caught by the hash") {
        std::ofstream(path, std::ios::app) << "9.99 + 9.99 = 19.98\n";
        try {
            load_dataset(path);
            FAIL("expected a hash mismatch");
        } catch (const Error& e) {
            CHECK(e.status() == Status::hash_mismatch);
        }
    }
    SUBCASE("a missing manifest is an io error") {
        fs::remove(path + ".manifest");
        try {
            load_dataset(path);
            FAIL("expected an io error");
        } catch (const Error& e) {
            CHECK(e.status() == Status::io);
        }
    }
    fs::remove_all(dir);
}
