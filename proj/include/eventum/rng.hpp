// rng.hpp — counter-based random streams for reproducible parallel sampling
//
// Draw n of stream (seed, k) is a pure function of (seed, k, n): trajectories
// can be farmed out to any number of workers in any order and still produce
// identical histories.

#pragma once

#include <cstdint>

namespace eventum {

namespace detail {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

}  // namespace detail

class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : master_seed_(master_seed),
          stream_index_(stream_index),
          key_(detail::mix64(master_seed + detail::kGamma) ^
               detail::mix64(stream_index * 0xD1B54A32D192ED03ull +
                             0x8CB92BA72F3D8DD7ull)),
          counter_(0) {}

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGamma);
    }

    /// Uniform draw on the open interval (0,1); exact endpoints are rejected
    /// and redrawn.
    double next_open01() {
        for (;;) {
            // 53-bit mantissa; the result lies in [0, 1).
            const double u =
                static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
            if (u > 0.0 && u < 1.0) return u;
        }
    }

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace eventum
