#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <vector>

#include "model/checkpoint.hpp"
#include "model/encoder.hpp"
#include "util/fs.hpp"
#include "util/rng.hpp"
#include "util/status.hpp"

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
    cfg.seed = 11;
    return cfg;
}

// Parameter count from the architecture alone, kept independent of the
// manifest builder it checks.
long long expected_param_count(const ModelConfig& c) {
    long long d = c.d_model, v = c.vocab_size, f = c.d_ff;
    long long embed = v * d + c.max_seq_len * d;
    long long attn = 4 * (d * d + d);
    long long ffn = d * f + f + f * d + d;
    long long norms = 2 * d + 2 * d;
    long long head = d * v + v;
    return embed + c.n_layers * (attn + ffn + norms) + 2 * d + head;
}

} // namespace

TEST_CASE("vocabulary maps the arithmetic alphabet bijectively") {
    Vocabulary v = Vocabulary::arithmetic();
    CHECK(v.size() == 18);
    CHECK(Vocabulary::kPad != Vocabulary::kMask);
    CHECK(Vocabulary::kMask != Vocabulary::kUnk);
    for (char c : std::string("0123456789.+-= ")) {
        int id = v.id_of(c);
        CHECK(id >= 3);
        CHECK(v.char_of(id) == c);
    }
    std::vector<int> ids = v.encode("1+2=");
    CHECK(ids == std::vector<int>{v.id_of('1'), v.id_of('+'), v.id_of('2'), v.id_of('=')});
    CHECK(v.encode("").empty());
    CHECK(v.encode("x")[0] == Vocabulary::kUnk);

    Vocabulary p = Vocabulary::printable_ascii();
    CHECK(p.size() == 98);
    for (char c : std::string("0123456789.+-= ")) CHECK(p.contains(c));
    CHECK(p.digit_ids().size() == 10);
    CHECK(p.char_of(p.digit_ids()[7]) == '7');
}

TEST_CASE("model config requires head-divisible width") {
    ModelConfig cfg = tiny_config();
    cfg.d_model = 15;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = tiny_config();
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.head_dim() == 8);
}

TEST_CASE("slice manifest partitions the flat array for random configs") {
    Rng rng(404);
    for (int trial = 0; trial < 8; ++trial) {
        ModelConfig cfg;
        cfg.vocab_size = 18;
        cfg.n_heads = 1 + static_cast<int>(rng.next_below(3));
        cfg.d_model = cfg.n_heads * (4 + static_cast<int>(rng.next_below(8)));
        cfg.n_layers = 1 + static_cast<int>(rng.next_below(3));
        cfg.d_ff = 8 + static_cast<int>(rng.next_below(40));
        cfg.max_seq_len = 16 + static_cast<int>(rng.next_below(48));
        ParameterVector pv(cfg);
        size_t cursor = 0;
        for (const SliceInfo& s : pv.manifest()) {
            CHECK(s.offset == cursor);  // no gaps, no overlap
            cursor += s.length;
        }
        CHECK(cursor == pv.count());
        CHECK(static_cast<long long>(pv.count()) == expected_param_count(cfg));

        size_t grouped = 0;
        for (const LayerGroup& g : pv.layer_groups()) grouped += g.length;
        CHECK(grouped == pv.count());
    }
}

TEST_CASE("default-width model has the hand-counted parameter total") {
    ModelConfig cfg;
    cfg.vocab_size = Vocabulary::printable_ascii().size();
    CHECK(expected_param_count(cfg) == 83810);
    Model model(cfg, Vocabulary::printable_ascii());
    CHECK(model.params().count() == 83810);
}

TEST_CASE("fresh models start from seeded non-degenerate weights") {
    Model a(tiny_config(), Vocabulary::arithmetic());
    Model b(tiny_config(), Vocabulary::arithmetic());
    CHECK(a.params().value_hash() == b.params().value_hash());

    ModelConfig other = tiny_config();
    other.seed = 12;
    Model c(other, Vocabulary::arithmetic());
    CHECK(a.params().value_hash() != c.params().value_hash());

    auto slice_rms = [&](const char* name) {
        SliceInfo s = a.params().slice(name);
        const float* v = a.params().values() + s.offset;
        double ss = 0.0;
        for (size_t i = 0; i < s.length; ++i) ss += static_cast<double>(v[i]) * v[i];
        return std::sqrt(ss / static_cast<double>(s.length));
    };
    CHECK(slice_rms("encoder_0.attn.wq") > 0.01);
    CHECK(slice_rms("encoder_0.attn.wq") < 0.04);
    CHECK(slice_rms("embedding.tok") > 0.01);

    SliceInfo gamma = a.params().slice("encoder_0.ln1.gamma");
    SliceInfo beta = a.params().slice("encoder_0.ln1.beta");
    for (size_t i = 0; i < gamma.length; ++i) {
        CHECK(a.params().values()[gamma.offset + i] == 1.0f);
        CHECK(a.params().values()[beta.offset + i] == 0.0f);
    }
}

TEST_CASE("forward obeys the shape law and is deterministic") {
    Model model(tiny_config(), Vocabulary::arithmetic());
    std::vector<int> ids = model.encode("1.50 + 2.25 = 3.75");
    Tensor l1 = model.forward(nullptr, model.bind_main(), ids);
    CHECK(l1.rows() == static_cast<int>(ids.size()));
    CHECK(l1.cols() == model.config().vocab_size);

    Tensor l2 = model.forward(nullptr, model.bind_main(), ids);
    CHECK(std::memcmp(l1.val(), l2.val(), sizeof(float) * l1.size()) == 0);

    bool finite = true, varies = false;
    for (size_t i = 0; i < l1.size(); ++i) {
        if (!std::isfinite(l1.val()[i])) finite = false;
        if (l1.val()[i] != l1.val()[0]) varies = true;
    }
    CHECK(finite);
    CHECK(varies);

    // Per-example forwards share no state, so batch order cannot matter.
    std::vector<int> other = model.encode("9.99 - 0.01 = 9.98");
    Tensor o1 = model.forward(nullptr, model.bind_main(), other);
    Tensor l3 = model.forward(nullptr, model.bind_main(), ids);
    CHECK(std::memcmp(l1.val(), l3.val(), sizeof(float) * l1.size()) == 0);
    CHECK(o1.rows() == static_cast<int>(other.size()));
}

TEST_CASE("forward rejects malformed sequences") {
    Model model(tiny_config(), Vocabulary::arithmetic());
    CHECK_THROWS_AS(model.forward(nullptr, model.bind_main(), {}), Error);
    CHECK_THROWS_AS(model.forward(nullptr, model.bind_main(), {99}), Error);
    CHECK_THROWS_AS(model.forward(nullptr, model.bind_main(), {-1}), Error);
    std::vector<int> over(33, 4);
    CHECK_THROWS_AS(model.forward(nullptr, model.bind_main(), over), Error);
    CHECK_THROWS_AS(model.encode("123456789012345678901234567890123"), Error);
}

TEST_CASE("padded forward zeroes the tail and matches the prefix") {
    Model model(tiny_config(), Vocabulary::arithmetic());
    std::vector<int> ids = model.encode("1 + 2 = 3");
    std::vector<int> padded = ids;
    padded.resize(ids.size() + 5, Vocabulary::kPad);

    Tensor plain = model.forward(nullptr, model.bind_main(), ids);
    Tensor pad = model.forward_padded(nullptr, model.bind_main(), padded);
    CHECK(pad.rows() == static_cast<int>(padded.size()));
    CHECK(std::memcmp(plain.val(), pad.val(), sizeof(float) * plain.size()) == 0);
    for (size_t i = plain.size(); i < pad.size(); ++i) CHECK(pad.val()[i] == 0.0f);

    std::vector<int> all_pad(4, Vocabulary::kPad);
    CHECK_THROWS_AS(model.forward_padded(nullptr, model.bind_main(), all_pad), Error);
}

TEST_CASE("greedy prediction reads one symbol per mask with stable ties") {
    Vocabulary v = Vocabulary::arithmetic();
    std::string wanted = "14434.28";
    Tensor logits = Tensor::zeros(10, v.size());
    for (int i = 0; i < 8; ++i)
        logits.val()[(i + 1) * v.size() + v.id_of(wanted[static_cast<size_t>(i)])] = 3.0f;
    std::vector<int> positions = {1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> pred = Model::predict_masked(logits, positions);
    std::string text;
    for (int id : pred) text += v.char_of(id);
    CHECK(text == "14434.28");

    Tensor uniform = Tensor::zeros(2, v.size());
    CHECK(Model::predict_masked(uniform, {0}) == std::vector<int>{0});

    // Shifting a whole row leaves the argmax alone.
    for (int c = 0; c < v.size(); ++c) logits.val()[3 * v.size() + c] += 5.0f;
    CHECK(Model::predict_masked(logits, positions)[2] == v.id_of('4'));

    CHECK_THROWS_AS(Model::predict_masked(uniform, {2}), Error);
    CHECK_THROWS_AS(Model::predict_masked(uniform, {-1}), Error);
}

TEST_CASE("checkpoints round-trip bit for bit and reject corruption") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "ewclab_test_model";
    fs::remove_all(dir);
    std::string path = (dir / "anchor.ckpt").string();

    Model model(tiny_config(), Vocabulary::arithmetic());
    Provenance prov = {{"phase", "pretrain"}, {"corpus_hash", "deadbeef"}};
    save_checkpoint(path, model, prov);

    LoadedCheckpoint lc = load_checkpoint(path);
    CHECK(lc.model->config() == model.config());
    CHECK(lc.model->vocab() == model.vocab());
    CHECK(lc.model->params().value_hash() == model.params().value_hash());
    CHECK(lc.provenance == prov);

    std::string second = (dir / "again.ckpt").string();
    save_checkpoint(second, *lc.model, lc.provenance);
    CHECK(read_file(path) == read_file(second));

    std::string bytes = read_file(path);
    write_file(path, bytes.substr(0, bytes.size() - 7));
    CHECK_THROWS_AS(load_checkpoint(path), Error);

    std::string tampered = bytes;
    tampered[tampered.size() - 3] = static_cast<char>(tampered[tampered.size() - 3] ^ 0x40);
    write_file(path, tampered);
    try {
        load_checkpoint(path);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.status() == Status::hash_mismatch);
    }
}
