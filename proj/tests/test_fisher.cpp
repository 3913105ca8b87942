#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "data/corpus.hpp"
#include "fisher/fisher.hpp"
#include "loss/losses.hpp"
#include "util/fmt.hpp"
#include "util/fs.hpp"
#include "util/rng.hpp"

using namespace ewclab;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.vocab_size = Vocabulary::arithmetic().size();
    cfg.d_model = 16;
    cfg.n_layers = 1;
    cfg.n_heads = 2;
    cfg.d_ff = 32;
    cfg.max_seq_len = 32;
    return cfg;
}

std::vector<MaskedInstance> arithmetic_instances(int count, uint64_t seed, int max_seq_len) {
    Vocabulary vocab = Vocabulary::arithmetic();
    GenConfig gc;
    gc.range = {Decimal{100, 2}, Decimal{99999, 2}};  // short expressions
    gc.decimal_places = 2;
    gc.count = count;
    gc.seed = seed;
    std::vector<MaskedInstance> out;
    for (const auto& ex : generate(gc)) out.push_back(mask_result(ex, vocab, max_seq_len));
    return out;
}

// One-sample-at-a-time reference: zero a fresh gradient buffer, run one
// backward, square and accumulate, divide by N at the end.
std::vector<double> brute_force_fisher(Model& model,
                                       const std::vector<MaskedInstance>& dataset,
                                       long long n) {
    std::vector<double> acc(model.params().count(), 0.0);
    for (long long s = 0; s < n; ++s) {
        const MaskedInstance& mi = dataset[static_cast<size_t>(s)];
        std::vector<float> grad(model.params().count(), 0.0f);
        Tape tape;
        BoundParams b = model.bind(grad.data());
        Tensor logits = model.forward(&tape, b, mi.input_ids);
        FusedLoss ce = masked_ce(&tape, logits, mi.positions, mi.target_ids);
        tape.backward_seeded({{ce.node, 1.0 / static_cast<double>(mi.positions.size())}});
        for (size_t i = 0; i < acc.size(); ++i)
            acc[i] += static_cast<double>(grad[i]) * static_cast<double>(grad[i]);
    }
    for (auto& v : acc) v /= static_cast<double>(n);
    return acc;
}

} // namespace

TEST_CASE("zero gradients everywhere give zero scores everywhere") {
    FisherScores f = estimate_fisher_core(10, 16, [](long long, float*) {});
    for (double v : f.values) CHECK(v == 0.0);
    CHECK(f.n_samples == 16);
}

TEST_CASE("a single sample scores exactly its squared gradient") {
    std::vector<float> g = {0.5f, -2.0f, 0.0f, 3.0f};
    FisherScores f = estimate_fisher_core(4, 1, [&](long long, float* grad) {
        std::copy(g.begin(), g.end(), grad);
    });
    for (size_t i = 0; i < g.size(); ++i)
        CHECK(f.values[i] == static_cast<double>(g[i]) * static_cast<double>(g[i]));
}

TEST_CASE("scaling every gradient by c scales the scores by c squared") {
    auto fill = [](long long s, float* grad) {
        Rng rng(static_cast<uint64_t>(s) + 1);
        for (int i = 0; i < 6; ++i) grad[i] = static_cast<float>(rng.next_normal());
    };
    FisherScores base = estimate_fisher_core(6, 24, fill);
    FisherScores scaled = estimate_fisher_core(6, 24, [&](long long s, float* grad) {
        fill(s, grad);
        for (int i = 0; i < 6; ++i) grad[i] *= 3.0f;
    });
    // The 32-bit scaling itself rounds, so the law holds to f32 precision.
    for (size_t i = 0; i < 6; ++i)
        CHECK(scaled.values[i] == doctest::Approx(9.0 * base.values[i]).epsilon(1e-6));
}

TEST_CASE("model-driven estimation equals the brute-force per-sample oracle") {
    Model model(tiny_config(), Vocabulary::arithmetic());
    model.params().init_weights(3);
    auto dataset = arithmetic_instances(64, 17, tiny_config().max_seq_len);

    FisherScores f = estimate_fisher(model, dataset, 2048, "arith");
    CHECK(f.n_samples == 64);
    CHECK(f.task_id == "arith");
    CHECK(f.model_hash == model.params().value_hash());
    CHECK(f.manifest == model.params().manifest_text());

    std::vector<double> oracle = brute_force_fisher(model, dataset, 64);
    REQUIRE(f.values.size() == oracle.size());
    double worst = 0.0;
    for (size_t i = 0; i < oracle.size(); ++i) {
        CHECK(f.values[i] >= 0.0);
        double denom = std::max({std::fabs(oracle[i]), std::fabs(f.values[i]), 1e-300});
        worst = std::max(worst, std::fabs(f.values[i] - oracle[i]) / denom);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("the sample cap limits how many instances are visited") {
    Model model(tiny_config(), Vocabulary::arithmetic());
    model.params().init_weights(5);
    auto dataset = arithmetic_instances(12, 29, tiny_config().max_seq_len);

    FisherScores capped = estimate_fisher(model, dataset, 4, "arith");
    CHECK(capped.n_samples == 4);
    std::vector<double> oracle = brute_force_fisher(model, dataset, 4);
    for (size_t i = 0; i < oracle.size(); ++i)
        CHECK(capped.values[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
}

TEST_CASE("sample order changes the scores only at rounding level") {
    Model model(tiny_config(), Vocabulary::arithmetic());
    model.params().init_weights(7);
    auto dataset = arithmetic_instances(32, 41, tiny_config().max_seq_len);

    FisherScores a = estimate_fisher(model, dataset, 2048, "arith");
    auto shuffled = dataset;
    Rng rng(99);
    rng.shuffle(shuffled);
    FisherScores b = estimate_fisher(model, shuffled, 2048, "arith");

    for (size_t i = 0; i < a.values.size(); ++i) {
        double denom = std::max({a.values[i], b.values[i], 1e-300});
        CHECK(std::fabs(a.values[i] - b.values[i]) / denom < 1e-7);
    }
}

TEST_CASE("adding samples never shrinks the unnormalized score mass") {
    Model model(tiny_config(), Vocabulary::arithmetic());
    model.params().init_weights(11);
    auto dataset = arithmetic_instances(48, 53, tiny_config().max_seq_len);

    double prev = 0.0;
    for (long long n : {16, 32, 48}) {
        FisherScores f = estimate_fisher(model, dataset, n, "arith");
        double mass = 0.0;
        for (double v : f.values) mass += v;
        mass *= static_cast<double>(n);
        CHECK(mass >= prev - 1e-12);
        prev = mass;
    }
}

TEST_CASE("estimation rejects empty or unmasked datasets") {
    Model model(tiny_config(), Vocabulary::arithmetic());
    model.params().init_weights(1);
    std::vector<MaskedInstance> empty;
    CHECK_THROWS_AS(estimate_fisher(model, empty, 8, "arith"), Error);

    std::vector<MaskedInstance> unmasked(1);
    unmasked[0].input_ids = model.encode("1.00 + 2.00 = 3.00");
    CHECK_THROWS_AS(estimate_fisher(model, unmasked, 8, "arith"), Error);

    auto ok = arithmetic_instances(2, 1, tiny_config().max_seq_len);
    CHECK_THROWS_AS(estimate_fisher(model, ok, 0, "arith"), Error);
}

TEST_CASE("top-n selection orders by score with ties to the lowest index") {
    CHECK(top_n({3, 1, 2}, 2) == std::vector<size_t>{0, 2});
    CHECK(top_n({5, 5, 5}, 2) == std::vector<size_t>{0, 1});
    CHECK(top_n({3, 1, 2}, 3) == std::vector<size_t>{0, 1, 2});
    CHECK(top_n({0.5}, 1) == std::vector<size_t>{0});
    CHECK_THROWS_AS(top_n({1, 2, 3}, 0), Error);
    CHECK_THROWS_AS(top_n({1, 2, 3}, 4), Error);
}

TEST_CASE("growing n only ever adds indices") {
    Rng rng(61);
    std::vector<double> scores(50);
    for (auto& s : scores) s = std::floor(rng.next_unit() * 8.0);  // plenty of ties
    std::vector<size_t> prev;
    for (size_t n = 1; n <= scores.size(); ++n) {
        std::vector<size_t> cur = top_n(scores, n);
        CHECK(cur.size() == n);
        CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
        prev = cur;
    }
}

TEST_CASE("cross-task overlap matches a hand-computed two-layer oracle") {
    FisherScores base;
    base.task_id = "base";
    base.values = {5, 1, 5, 0, 2, 7, /* layer_b */ 3, 3, 9, 0};
    FisherScores taskA = base;
    taskA.task_id = "taskA";
    taskA.values = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    FisherScores zero = base;
    zero.task_id = "zero";
    zero.values.assign(10, 0.0);

    std::vector<LayerGroup> layers = {{"layer_a", 0, 6}, {"layer_b", 6, 4}};
    OverlapReport r = cross_task_overlap(base, {taskA, zero}, 3, layers);

    REQUIRE(r.layers.size() == 2);
    // layer_a scores [5,1,5,0,2,7]: ranked 7@5, 5@0, 5@2.
    CHECK(r.layers[0].indices == std::vector<size_t>{5, 0, 2});
    CHECK(r.layers[0].base_scores == std::vector<double>{7, 5, 5});
    // layer_b scores [3,3,9,0]: ranked 9@8, 3@6, 3@7.
    CHECK(r.layers[1].indices == std::vector<size_t>{8, 6, 7});
    CHECK(r.layers[1].base_scores == std::vector<double>{9, 3, 3});

    // taskA's sensitivities at those same indices.
    CHECK(r.layers[0].scores[0] == std::vector<double>{60, 10, 30});
    CHECK(r.layers[1].scores[0] == std::vector<double>{90, 70, 80});
    CHECK(r.layers[0].stats[0].mean == doctest::Approx(100.0 / 3));
    CHECK(r.layers[0].stats[0].median == 30);
    CHECK(r.layers[0].stats[0].max == 60);
    CHECK(r.layers[1].stats[0].mean == 80);
    CHECK(r.layers[1].stats[0].median == 80);
    CHECK(r.layers[1].stats[0].max == 90);

    // The all-zero task reports zero everywhere.
    CHECK(r.layers[0].scores[1] == std::vector<double>{0, 0, 0});
    CHECK(r.layers[1].stats[1].max == 0);

    std::string csv = overlap_csv(r);
    CHECK(csv.find("layer,rank,param_index,base_score,score_task_1,score_task_2\n") == 0);
    std::string row_a = "layer_a,1,5," + fmt_double(7) + "," + fmt_double(60) + "," +
                        fmt_double(0) + "\n";
    std::string row_b = "layer_b,3,7," + fmt_double(3) + "," + fmt_double(80) + "," +
                        fmt_double(0) + "\n";
    CHECK(csv.find(row_a) != std::string::npos);
    CHECK(csv.find(row_b) != std::string::npos);
}

TEST_CASE("self-comparison reports the base scores back") {
    FisherScores base;
    base.task_id = "base";
    base.values = {4, 8, 1, 0, 3, 9};
    std::vector<LayerGroup> layers = {{"all", 0, 6}};
    OverlapReport r = cross_task_overlap(base, {base}, 2, layers);
    CHECK(r.layers[0].indices == std::vector<size_t>{5, 1});
    CHECK(r.layers[0].scores[0] == r.layers[0].base_scores);
}

TEST_CASE("overlap clamps n to the layer size and rejects foreign manifests") {
    FisherScores base;
    base.task_id = "base";
    base.manifest = "a 0 4\n";
    base.values = {1, 2, 3, 4};
    std::vector<LayerGroup> layers = {{"a", 0, 4}};
    OverlapReport r = cross_task_overlap(base, {base}, 100, layers);
    CHECK(r.layers[0].indices.size() == 4);

    FisherScores foreign = base;
    foreign.task_id = "foreign";
    foreign.manifest = "b 0 4\n";
    CHECK_THROWS_AS(cross_task_overlap(base, {foreign}, 2, layers), Error);
}

TEST_CASE("score files round-trip and are integrity-checked") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "ewclab_test_fisher";
    fs::remove_all(dir);
    std::string path = (dir / "anchor.fisher").string();

    Model model(tiny_config(), Vocabulary::arithmetic());
    model.params().init_weights(13);
    auto dataset = arithmetic_instances(8, 71, tiny_config().max_seq_len);
    FisherScores f = estimate_fisher(model, dataset, 2048, "anchor");

    save_fisher(path, f);
    FisherScores back = load_fisher(path);
    CHECK(back.task_id == f.task_id);
    CHECK(back.n_samples == f.n_samples);
    CHECK(back.model_hash == f.model_hash);
    CHECK(back.manifest == f.manifest);
    REQUIRE(back.values.size() == f.values.size());
    for (size_t i = 0; i < f.values.size(); ++i) CHECK(back.values[i] == f.values[i]);

    // Idempotent rewrite.
    std::string bytes = read_file(path);
    save_fisher(path, f);
    CHECK(read_file(path) == bytes);

    SUBCASE("a corrupted blob fails the hash check") {
        std::string tampered = bytes;
        tampered[tampered.size() - 3] ^= 0x40;
        write_file(path, tampered);
        try {
            load_fisher(path);
            FAIL("expected a hash mismatch");
        } catch (const Error& e) {
            CHECK(e.status() == Status::hash_mismatch);
        }
    }
    SUBCASE("a truncated file is an io error") {
        write_file(path, bytes.substr(0, bytes.size() / 2));
        try {
            load_fisher(path);
            FAIL("expected an io error");
        } catch (const Error& e) {
            CHECK(e.status() == Status::io);
        }
    }
    fs::remove_all(dir);
}
