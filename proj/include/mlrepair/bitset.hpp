#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#ifdef _MSC_VER
#include <intrin.h>
#endif

namespace mlrepair {

// Fixed-size bit vector used for per-test statement coverage.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    size_t size() const { return bits_; }

    void set(size_t i) { words_[i >> 6] |= (uint64_t{1} << (i & 63)); }

    bool test(size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    size_t count() const {
        size_t n = 0;
        for (uint64_t w : words_) n += popcount(w);
        return n;
    }

    bool intersects(const Bitset& other) const {
        size_t n = std::min(words_.size(), other.words_.size());
        for (size_t i = 0; i < n; ++i)
            if (words_[i] & other.words_[i]) return true;
        return false;
    }

    bool any() const {
        for (uint64_t w : words_)
            if (w) return true;
        return false;
    }

private:
    static size_t popcount(uint64_t w) {
#ifdef _MSC_VER
        return static_cast<size_t>(__popcnt64(w));
#else
        return static_cast<size_t>(__builtin_popcountll(w));
#endif
    }

    size_t bits_ = 0;
    std::vector<uint64_t> words_;
};

}  // namespace mlrepair
