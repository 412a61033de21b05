#include "twostep/rng.hpp"

namespace twostep {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

CounterRng::result_type CounterRng::operator()() noexcept {
    return mix64(key_ ^ mix64(counter_++));
}

double CounterRng::uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

CounterRng CounterRng::substream(std::uint64_t master_seed, std::uint64_t index) noexcept {
    // Two rounds so that nearby (seed, index) pairs land far apart.
    return CounterRng(mix64(mix64(master_seed) ^ (index * 0xD1B54A32D192ED03ULL + 1)));
}

}  // namespace twostep
