#include "bgrl/optim.hpp"

#include "bgrl/errors.hpp"

#include <cmath>
#include <string>

namespace bgrl {

Adam::Adam(std::vector<Tensor> params, Hyper hyper)
    : params_(std::move(params)), hyper_(hyper) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void Adam::step(double lr) {
    ++t_;
    const double b1 = hyper_.beta1, b2 = hyper_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        auto data = params_[pi].mutable_data();
        auto grad = params_[pi].grad();
        auto& m = m_[pi];
        auto& v = v_[pi];
        for (std::size_t i = 0; i < data.size(); ++i) {
            double g = grad[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            data[i] -= lr * mhat / (std::sqrt(vhat) + hyper_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

double cosine_lr(std::size_t epoch, std::size_t total_epochs, double base_lr, double min_lr) {
    if (total_epochs == 0 || epoch > total_epochs) {
        throw ContractError("cosine_lr: epoch " + std::to_string(epoch) +
                            " out of range [0, " + std::to_string(total_epochs) + "]");
    }
    double t = static_cast<double>(epoch) / static_cast<double>(total_epochs);
    return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(M_PI * t));
}

} // namespace bgrl
