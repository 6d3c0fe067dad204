#pragma once

#include "bgrl/nn.hpp"
#include "bgrl/tensor.hpp"
#include "bgrl/volume.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace bgrl {

// 3D denoising autoencoder: three encoder blocks of conv -> batchnorm ->
// relu -> maxpool, a fully connected latent head on the flattened encoder
// output, and a mirror decoder of nearest-neighbour upsampling followed by
// convolution per stage. The conv feature map (not the latent vector) feeds
// the decoder.
struct AutoencoderConfig {
    std::size_t depth = 64, height = 64, width = 64;
    std::array<std::size_t, 3> channels{8, 16, 32};
    std::size_t kernel = 3;  // odd; padding = kernel/2 keeps spatial dims
    std::size_t pool = 2;
    std::size_t latent_dim = 512;

    std::size_t padding() const { return kernel / 2; }
    // spatial dims after the three pools
    std::size_t out_depth() const { return depth / (pool * pool * pool); }
    std::size_t out_height() const { return height / (pool * pool * pool); }
    std::size_t out_width() const { return width / (pool * pool * pool); }
    std::size_t flat_dim() const { return channels[2] * out_depth() * out_height() * out_width(); }
};

struct AutoencoderModel {
    struct EncBlock {
        Tensor kernels; // [c_out x c_in x k x k x k]
        Tensor gamma, beta;
        BatchNormState bn;
    };
    struct DecStage {
        Tensor kernels;
        Tensor bias; // per output channel
    };

    AutoencoderConfig cfg;
    std::array<EncBlock, 3> enc;
    Tensor latent_w, latent_b;
    std::array<DecStage, 3> dec;

    std::vector<Tensor> trainable_params();
};

struct AutoencoderOutput {
    Tensor reconstruction; // [1 x D x H x W]
    Tensor latent;         // [latent_dim]
};

struct AeTrainOptions {
    std::size_t epochs = 100;
    double lr = 9e-4;
    double min_lr = 0.0; // cosine annealing target
    std::uint64_t seed = 1;
};

struct AeTrainResult {
    std::vector<double> loss_trace; // one mean reconstruction loss per epoch
};

AutoencoderModel init_autoencoder(const AutoencoderConfig& cfg, std::uint64_t seed);

// x is [1 x D x H x W]; train toggles batch-norm mode.
AutoencoderOutput autoencoder_forward(AutoencoderModel& model, const Tensor& x, bool train);

// Minimizes the reconstruction error between f_d(f_e(x + noise)) and the
// clean x over the given samples. Volumes are min-max normalized to [0,1]
// before noise injection; noise is drawn fresh per (epoch, sample) from the
// run seed. Adam with cosine-annealed learning rate, one update per sample.
AeTrainResult train_autoencoder(std::span<const VolumeSample> train_samples,
                                AutoencoderModel& model, const AeTrainOptions& opts);

// Latent features from clean inputs with batch-norm in eval mode, one row
// per sample in input order. No noise is applied.
FeatureMatrix extract_features(AutoencoderModel& model, std::span<const VolumeSample> samples);

} // namespace bgrl
