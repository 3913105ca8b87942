#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "data/gen.hpp"
#include "model/vocab.hpp"

namespace ewclab {

// Plain-text corpus cut into sequential full windows (stride = window length,
// trailing remainder dropped). Characters outside the vocabulary become
// [UNK] and are never chosen as mask targets.
class Corpus {
  public:
    static Corpus load(const std::string& path, int window_len);
    static Corpus from_text(std::string text, int window_len);

    size_t n_windows() const { return n_windows_; }
    int window_len() const { return window_len_; }
    uint64_t content_hash() const { return content_hash_; }
    std::string window(size_t index) const;

    // Head/tail window split for pretraining vs the held-out probe set.
    size_t heldout_begin(double heldout_fraction) const;

  private:
    std::string text_;
    int window_len_ = 0;
    size_t n_windows_ = 0;
    uint64_t content_hash_ = 0;
};

// Masks floor(mask_fraction · window_len) positions (at least one) of window
// `index`, chosen uniformly among in-vocabulary characters with a stream
// seeded by (seed, index). Returns empty positions if nothing is maskable.
MaskedInstance mask_window(const Corpus& corpus, size_t index, const Vocabulary& vocab,
                           double mask_fraction, uint64_t seed);

// Stable fingerprint of the mask layout a (corpus, seed, fraction, window
// range) combination produces; retention comparisons assert equality.
uint64_t mask_manifest_hash(const Corpus& corpus, const Vocabulary& vocab,
                            double mask_fraction, uint64_t seed, size_t begin, size_t end);

} // namespace ewclab
