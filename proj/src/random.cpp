#include "bgrl/random.hpp"

#include <cmath>

namespace bgrl {

Tensor seeded_randn(Shape shape, std::uint64_t seed) {
    Prng rng(seed);
    return randn(std::move(shape), rng);
}

Tensor randn(Shape shape, Prng& rng) {
    std::size_t n = shape_numel(shape);
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = rng.next_normal();
    return Tensor::from_data(std::move(shape), std::move(data));
}

Tensor rand_uniform(Shape shape, double lo, double hi, Prng& rng) {
    std::size_t n = shape_numel(shape);
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = rng.next_uniform(lo, hi);
    return Tensor::from_data(std::move(shape), std::move(data));
}

Tensor init_fan_in(Shape shape, std::size_t fan_in, Prng& rng, bool requires_grad) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor t = rand_uniform(std::move(shape), -bound, bound, rng);
    t.set_requires_grad(requires_grad);
    return t;
}

} // namespace bgrl
