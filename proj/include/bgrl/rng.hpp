#pragma once

#include <cstdint>
#include <string_view>

namespace bgrl {

// Counter-based deterministic generator. Each draw is a pure function of
// (key, counter), so a stream can be recreated from its seed at any time and
// independent streams are derived by re-keying rather than by skipping ahead.
// Same seed and same call sequence give bit-identical output on every run.
class Prng {
public:
    explicit Prng(std::uint64_t seed);

    // Independent child stream. Deriving with the same tag always yields the
    // same stream; different tags decorrelate.
    Prng derive(std::uint64_t stream) const;
    Prng derive(std::string_view name) const;

    std::uint64_t next_u64();

    // Uniform on [0, 1).
    double next_uniform();

    // Standard normal via Box-Muller (second value cached).
    double next_normal();

    // Uniform on [lo, hi).
    double next_uniform(double lo, double hi);

    // Fisher-Yates index helper: uniform integer in [0, n).
    std::uint64_t next_index(std::uint64_t n);

private:
    Prng(std::uint64_t key, int) : key_(key) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace bgrl
