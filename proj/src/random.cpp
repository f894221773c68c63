#include "ldplab/random.hpp"

namespace ldplab {

std::uint64_t mix64(std::uint64_t x) noexcept {
    // SplitMix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(StreamKey key) noexcept
    : key_(mix64(mix64(mix64(key.seed) ^ key.replica) + static_cast<std::uint64_t>(key.purpose))) {}

}  // namespace ldplab
