#include "bgrl/rng.hpp"

#include <cmath>

namespace bgrl {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer: a strong 64-bit mix.
std::uint64_t mix64(std::uint64_t z) {
    z += kGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t hash_bytes(std::string_view s) {
    // FNV-1a, then mixed.
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return mix64(h);
}

} // namespace

Prng::Prng(std::uint64_t seed) : key_(mix64(seed ^ 0x5851F42D4C957F2Dull)) {}

Prng Prng::derive(std::uint64_t stream) const {
    return Prng(mix64(key_ ^ mix64(stream)), 0);
}

Prng Prng::derive(std::string_view name) const {
    return Prng(mix64(key_ ^ hash_bytes(name)), 0);
}

std::uint64_t Prng::next_u64() {
    return mix64(key_ + kGamma * ++counter_);
}

double Prng::next_uniform() {
    // Top 53 bits -> double in [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Prng::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    double u1 = 1.0 - next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double Prng::next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
}

std::uint64_t Prng::next_index(std::uint64_t n) {
    // Multiply-shift bound; n is tiny here so modulo bias is irrelevant,
    // but this keeps draws exact for any n.
    return static_cast<std::uint64_t>(next_uniform() * static_cast<double>(n)) % n;
}

} // namespace bgrl
