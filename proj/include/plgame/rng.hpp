#pragma once

// Counter-based random streams: every draw is a pure hash of
// (master seed, stream id, counter), so episodes are reproducible and
// independent regardless of scheduling.

#include <cstdint>

namespace plgame {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream)
        : key_(detail::splitmix64(master_seed ^ detail::splitmix64(stream ^ 0xa5a5a5a5a5a5a5a5ULL))) {}

    std::uint64_t next_u64() { return detail::splitmix64(key_ ^ detail::splitmix64(counter_++)); }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// True with the given probability.
    bool coin(double prob) { return next_double() < prob; }

    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace plgame
