#pragma once

#include <cstdint>
#include <random>

namespace pdqp {

// Stateless 64-bit mixer (splitmix64 finalizer). Used to scramble seeds and
// to derive independent substream seeds by counter.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic seedable stream of 64-bit words and doubles.
//
// mt19937_64 is fully specified by the standard, so the word sequence is
// identical on every platform. Doubles are built with a fixed 53-bit mapping
// and integers with a multiply-shift; std::uniform_*_distribution is never
// used because its output is implementation-defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), eng_(mix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    // Independent child stream derived from (root seed, index).
    RngStream substream(std::uint64_t index) const {
        return RngStream(mix64(seed_ ^ mix64(0x5851f42d4c957f2dull + index)));
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1), 53 random bits.
    double next_double() { return double(eng_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), n >= 1.
    std::uint64_t next_below(std::uint64_t n) {
        return std::uint64_t((static_cast<unsigned __int128>(eng_()) * n) >> 64);
    }

    bool next_bernoulli(double p) { return next_double() < p; }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

}  // namespace pdqp
