#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace fairsynth {

// splitmix64 finalizer; full avalanche, used for seed mixing only.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based derivation: child seed = mix(mix(master) ^ mix(stream)).
// Stage seeds are independent of one another and stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(mix64(master) ^ mix64(stream + 0x6a09e667f3bcc909ULL));
}

// FNV-1a, for deriving seed streams from stage names.
inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t stream = 0) {
    return derive_seed(master, hash_tag(tag) ^ mix64(stream));
}

// mt19937_64 with portable draw helpers. std::*_distribution is
// implementation-defined, so uniforms are produced by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // 53-bit uniform in [0, 1)
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n) via rejection
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Inverse-CDF draw from a cumulative array (last entry ~1).
    std::size_t categorical_from_cdf(std::span<const double> cdf) {
        const double u = uniform01();
        std::size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (u < cdf[mid])
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

    // In-place Fisher-Yates; stable across platforms (std::shuffle is not).
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

// Zero-probability categories keep cdf[i] == cdf[i-1] bit-exact, so the
// smallest-index search in categorical_from_cdf can never select them.
inline std::vector<double> cumulative_sums(std::span<const double> probs) {
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    std::size_t last_positive = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf[i] = acc;
        if (probs[i] > 0.0) last_positive = i;
    }
    // Pin the top of the support to exactly 1 to guard rounding drift.
    if (last_positive < probs.size()) {
        for (std::size_t i = last_positive; i < probs.size(); ++i) cdf[i] = 1.0;
    }
    return cdf;
}

}  // namespace fairsynth
