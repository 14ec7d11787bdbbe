#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "cdmsc/common.hpp"

namespace cdmsc {

// Counter-based SplitMix64 stream. Output i depends only on (key, i), so the
// sequence is reproducible across platforms and independent of call batching.
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key), counter_(0) {}

    // Substream keyed by (seed, label) pairs, e.g. per parameter or per epoch.
    static Rng keyed(std::uint64_t seed, std::string_view label,
                     std::uint64_t index = 0) {
        std::uint64_t h = fnv1a64(label);
        h = fnv1a64(&seed, sizeof(seed), h);
        h = fnv1a64(&index, sizeof(index), h);
        return Rng(h);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = key_ + 0x9e3779b97f4a7c15ULL * (++counter_);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_real(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) return 0;
        std::uint64_t threshold = (0ULL - n) % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Marsaglia polar method; deterministic given the stream position.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // Fisher-Yates; std::shuffle is not pinned by the standard.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i + 1));
            std::swap(items[i], items[j]);
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cdmsc
