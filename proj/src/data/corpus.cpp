#include "data/corpus.hpp"

#include <algorithm>

#include "util/fmt.hpp"
#include "util/fs.hpp"
#include "util/hash.hpp"
#include "util/rng.hpp"

namespace ewclab {

Corpus Corpus::load(const std::string& path, int window_len) {
    std::string text = read_file(path);
    require(!text.empty(), Status::io, "corpus file is empty: " + path);
    return from_text(std::move(text), window_len);
}

Corpus Corpus::from_text(std::string text, int window_len) {
    require(window_len > 0, Status::bad_config, "corpus: window length must be positive");
    require(!text.empty(), Status::io, "corpus: empty text");
    Corpus c;
    c.text_ = std::move(text);
    c.window_len_ = window_len;
    c.n_windows_ = c.text_.size() / static_cast<size_t>(window_len);
    require(c.n_windows_ > 0, Status::bad_config,
            strf("corpus: %zu characters is shorter than one %d-character window",
                 c.text_.size(), window_len));
    c.content_hash_ = fnv1a64(c.text_.data(), c.text_.size());
    return c;
}

std::string Corpus::window(size_t index) const {
    require(index < n_windows_, Status::internal,
            strf("corpus: window %zu out of %zu", index, n_windows_));
    return text_.substr(index * static_cast<size_t>(window_len_),
                        static_cast<size_t>(window_len_));
}

size_t Corpus::heldout_begin(double heldout_fraction) const {
    require(heldout_fraction > 0.0 && heldout_fraction < 1.0, Status::bad_config,
            "corpus: heldout fraction must lie in (0,1)");
    size_t held = static_cast<size_t>(heldout_fraction * static_cast<double>(n_windows_));
    if (held == 0) held = 1;
    require(held < n_windows_, Status::bad_config,
            "corpus: heldout fraction leaves no training windows");
    return n_windows_ - held;
}

MaskedInstance mask_window(const Corpus& corpus, size_t index, const Vocabulary& vocab,
                           double mask_fraction, uint64_t seed) {
    require(mask_fraction > 0.0 && mask_fraction < 1.0, Status::bad_config,
            "corpus: mask fraction must lie in (0,1)");
    std::string w = corpus.window(index);
    MaskedInstance mi;
    mi.input_ids = vocab.encode(w);

    std::vector<int> eligible;
    for (size_t i = 0; i < mi.input_ids.size(); ++i)
        if (mi.input_ids[i] != Vocabulary::kUnk) eligible.push_back(static_cast<int>(i));
    if (eligible.empty()) return mi;

    size_t want = static_cast<size_t>(mask_fraction * static_cast<double>(w.size()));
    if (want == 0) want = 1;
    want = std::min(want, eligible.size());

    Rng rng(seed_for(seed, "mask", static_cast<uint64_t>(index)));
    rng.shuffle(eligible);
    eligible.resize(want);
    std::sort(eligible.begin(), eligible.end());
    for (int p : eligible) {
        mi.positions.push_back(p);
        mi.target_ids.push_back(mi.input_ids[static_cast<size_t>(p)]);
        mi.input_ids[static_cast<size_t>(p)] = Vocabulary::kMask;
    }
    return mi;
}

uint64_t mask_manifest_hash(const Corpus& corpus, const Vocabulary& vocab,
                            double mask_fraction, uint64_t seed, size_t begin, size_t end) {
    uint64_t h = kFnvOffset;
    h = hash_mix_u64(h, corpus.content_hash());
    h = hash_mix_u64(h, static_cast<uint64_t>(corpus.window_len()));
    h = hash_mix_u64(h, begin);
    h = hash_mix_u64(h, end);
    for (size_t i = begin; i < end; ++i) {
        MaskedInstance mi = mask_window(corpus, i, vocab, mask_fraction, seed);
        for (int p : mi.positions) h = hash_mix_u64(h, static_cast<uint64_t>(p));
    }
    return h;
}

} // namespace ewclab
