#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "prodkit/hash.hpp"

namespace prodkit {

/// Deterministic random stream. All dataset-producing code draws from one of
/// these, derived from a root seed and namespaced by stable labels (record id,
/// task, attribute name) so that adding records never reshuffles the streams
/// of existing ones.
///
/// Draws go through our own bounded-integer sampler instead of the standard
/// distributions, whose output is implementation-defined; mt19937_64 itself
/// is pinned by the standard, so streams are byte-stable across platforms.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    /// Derives an independent child stream for `label`.
    SeededRng ns(std::string_view label) const {
        std::uint64_t child = fnv1a64(label, seed_ ^ kFnvOffset);
        // fnv can in principle land on 0; mt19937_64 accepts any value.
        return SeededRng(child);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n). n must be > 0. Rejection sampling keeps the
    /// draw unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    /// Uniform double in [0, 1) with 53 bits of entropy.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    std::size_t pick_index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = pick_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Draws k distinct indices out of [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        shuffle(pool);
        if (k < pool.size()) pool.resize(k);
        return pool;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace prodkit
