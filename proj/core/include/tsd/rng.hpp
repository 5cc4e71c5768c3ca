// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace tsd {

// Counter-based generator: output i of stream `seed` is a pure function of
// (seed, i), so any draw can be replayed without storing engine state.
// The mixer is splitmix64 applied to seed ^ golden-ratio-scrambled counter.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (++counter_);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Marsaglia polar would consume a variable number of draws; Box-Muller
    // keeps consumption fixed at two per call.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Bounded draw for shuffles; modulo bias is negligible at 64 bits.
    std::uint64_t next_below(std::uint64_t n) { return n ? next_u64() % n : 0; }

    // Independent stream for a derived purpose (repeat r, worker w, ...).
    Rng fork(std::uint64_t stream) const {
        Rng r(seed_ ^ (0x6a09e667f3bcc909ULL * (stream + 1)));
        return r;
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

template <class It>
void shuffle(It first, It last, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        auto j = rng.next_below(i);
        std::swap(first[i - 1], first[j]);
    }
}

}  // namespace tsd
