#pragma once

#include <cstdint>

namespace wavewidth {

/// Counter-style splitmix64 generator. Cheap to seed, no warm-up needed, and
/// independent streams can be derived from (seed, stream_index) so results do
/// not depend on scheduling order.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    /// Stream derived from a base seed and a stream index; streams with
    /// different indices are statistically independent.
    static SplitMix64 derived(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 g(seed);
        std::uint64_t mixed = g.next() ^ (stream + 0x9e3779b97f4a7c15ULL);
        SplitMix64 h(mixed);
        h.next();
        return h;
    }

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

}  // namespace wavewidth
