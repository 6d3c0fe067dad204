#pragma once

#include "bgrl/tensor.hpp"

namespace bgrl {

// 3D cross-correlation, stride 1, zero padding. input is [C_in x D x H x W],
// kernels [C_out x C_in x k x k x k] with k odd. Output spatial dims are
// D + 2*padding - k + 1 (same for H, W). Differentiable w.r.t. input and
// kernels.
Tensor conv3d(const Tensor& input, const Tensor& kernels, std::size_t padding);

// Per-window maximum over non-overlapping cubes of side `window`; trailing
// remainder voxels are dropped. Backward routes gradient to the argmax
// position only (first occurrence in scan order on ties).
Tensor maxpool3d(const Tensor& input, std::size_t window);

// Batch normalization over [N x C x D x H x W], statistics per channel.
// Train mode uses biased batch variance and updates running stats in place
// with momentum 0.1; eval mode normalizes with the running stats.
struct BatchNormState {
    Tensor running_mean; // [C]
    Tensor running_var;  // [C]
};
inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

Tensor batchnorm3d(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                   BatchNormState& state, bool train);

// Nearest-neighbour upsampling of [C x D x H x W] by an integer factor.
Tensor upsample_nearest3d(const Tensor& input, std::size_t factor);

// Adds bias[c] to every voxel of channel c in [C x D x H x W].
Tensor add_channel_bias(const Tensor& input, const Tensor& bias);

} // namespace bgrl
