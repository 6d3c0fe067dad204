#pragma once

#include "bgrl/rng.hpp"
#include "bgrl/tensor.hpp"

namespace bgrl {

// Standard-normal tensor from a fresh stream; same (shape, seed) is
// bit-identical on every call.
Tensor seeded_randn(Shape shape, std::uint64_t seed);

// Draws from an existing stream (advances it).
Tensor randn(Shape shape, Prng& rng);
Tensor rand_uniform(Shape shape, double lo, double hi, Prng& rng);

// Scaled-uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor init_fan_in(Shape shape, std::size_t fan_in, Prng& rng, bool requires_grad = true);

} // namespace bgrl
