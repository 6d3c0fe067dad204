#pragma once

#include "bgrl/tensor.hpp"

#include <vector>

namespace bgrl {

// Standard published Adam with bias correction. Gradients are read, never
// written: callers zero them after each step.
class Adam {
public:
    struct Hyper {
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    explicit Adam(std::vector<Tensor> params) : Adam(std::move(params), Hyper{}) {}
    Adam(std::vector<Tensor> params, Hyper hyper);

    void step(double lr);
    void zero_grad();
    long step_count() const { return t_; }
    const std::vector<Tensor>& params() const { return params_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    long t_ = 0;
    Hyper hyper_;
};

// Cosine annealing: min_lr + 0.5*(base_lr - min_lr)*(1 + cos(pi*epoch/total)).
// Requires 0 <= epoch <= total_epochs.
double cosine_lr(std::size_t epoch, std::size_t total_epochs, double base_lr, double min_lr = 0.0);

} // namespace bgrl
