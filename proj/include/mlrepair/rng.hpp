#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mlrepair {

// Deterministic random source. The engine (std::mt19937_64) produces the same
// stream on every platform; the derived draws below avoid std::*_distribution,
// whose output is implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Inclusive range [lo, hi].
    int uniform_int(int lo, int hi) {
        uint64_t span = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    size_t uniform_index(size_t n) { return static_cast<size_t>(next_u64() % n); }

    // [0, 1) with 53 bits of precision.
    double uniform_real() { return (next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform_real() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[uniform_index(items.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = uniform_index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

inline uint64_t fnv1a64(std::string_view data, uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Stable per-trial seed from campaign seed and run coordinates.
inline uint64_t derive_seed(uint64_t base, std::string_view bug, std::string_view variant,
                            int trial) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (int i = 0; i < 8; ++i) {
        h ^= (base >> (8 * i)) & 0xff;
        h *= 0x100000001b3ull;
    }
    h = fnv1a64(bug, h);
    h = fnv1a64("|", h);
    h = fnv1a64(variant, h);
    h = fnv1a64("|", h);
    for (int i = 0; i < 4; ++i) {
        h ^= (static_cast<uint64_t>(trial) >> (8 * i)) & 0xff;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace mlrepair
