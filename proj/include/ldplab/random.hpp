#pragma once

#include <cstdint>
#include <limits>

namespace ldplab {

/// Purpose tags that separate the random streams used by one replica.
enum class Purpose : std::uint64_t {
    brownian = 1,
    jumps = 2,
    thinning = 3,
    conditions = 4,
    pilot = 5,
    controls = 6,
    optimizer = 7,
    generic = 8,
};

struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
    Purpose purpose = Purpose::generic;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: draw i is mix64(key + i * gamma), with the key derived from
/// (seed, replica, purpose). Distinct keys give statistically independent streams.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(StreamKey key) noexcept;
    explicit CounterRng(std::uint64_t seed) noexcept : CounterRng(StreamKey{seed, 0, Purpose::generic}) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        counter_ += kGamma;
        return mix64(key_ + counter_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    std::uint64_t draws() const noexcept { return counter_ / kGamma; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace ldplab
