#ifndef TWOSTEP_RNG_HPP
#define TWOSTEP_RNG_HPP

#include <cstdint>
#include <limits>

namespace twostep {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: the i-th output is mix64(key ^ mix64(i)), so the
/// whole stream is a pure function of (key, counter). Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    /// Independent stream for job `index` of a run seeded with `master_seed`.
    /// Depends only on the pair, never on the order in which jobs execute.
    static CounterRng substream(std::uint64_t master_seed, std::uint64_t index) noexcept;

    friend bool operator==(const CounterRng&, const CounterRng&) = default;

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace twostep

#endif  // TWOSTEP_RNG_HPP
