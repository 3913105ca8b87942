#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ewclab {

// mt19937_64 with hand-rolled draw helpers. std::uniform_int_distribution and
// std::normal_distribution are not bit-stable across standard libraries, and
// every artifact here has to regenerate byte-identically.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Unbiased integer in [0, bound) by rejection.
    uint64_t next_below(uint64_t bound) {
        if (bound == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return (eng_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; caches the second value.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = next_unit();
        } while (u <= 0.0);
        v = next_unit();
        double r = std::sqrt(-2.0 * std::log(u));
        s = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(s);
        have_spare_ = true;
        return r * std::cos(s);
    }

    // In-place Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline std::vector<size_t> permutation(size_t n, uint64_t seed) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    return idx;
}

} // namespace ewclab
