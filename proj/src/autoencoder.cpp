#include "bgrl/autoencoder.hpp"

#include "bgrl/errors.hpp"
#include "bgrl/optim.hpp"
#include "bgrl/random.hpp"

#include <string>

namespace bgrl {

namespace {

void check_config(const AutoencoderConfig& cfg) {
    const std::size_t p3 = cfg.pool * cfg.pool * cfg.pool;
    if (cfg.kernel % 2 == 0) {
        throw ContractError("autoencoder: kernel must be odd, got " + std::to_string(cfg.kernel));
    }
    if (cfg.depth % p3 || cfg.height % p3 || cfg.width % p3 || cfg.out_depth() == 0 ||
        cfg.out_height() == 0 || cfg.out_width() == 0) {
        throw DimensionError("autoencoder: input " + std::to_string(cfg.depth) + "x" +
                             std::to_string(cfg.height) + "x" + std::to_string(cfg.width) +
                             " is not divisible by pool^3 = " + std::to_string(p3));
    }
}

} // namespace

std::vector<Tensor> AutoencoderModel::trainable_params() {
    std::vector<Tensor> out;
    for (auto& b : enc) {
        out.push_back(b.kernels);
        out.push_back(b.gamma);
        out.push_back(b.beta);
    }
    out.push_back(latent_w);
    out.push_back(latent_b);
    for (auto& d : dec) {
        out.push_back(d.kernels);
        out.push_back(d.bias);
    }
    return out;
}

AutoencoderModel init_autoencoder(const AutoencoderConfig& cfg, std::uint64_t seed) {
    check_config(cfg);
    AutoencoderModel m;
    m.cfg = cfg;
    Prng root(seed);
    const std::size_t k = cfg.kernel;
    std::size_t c_in = 1;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t c_out = cfg.channels[i];
        Prng rng = root.derive("enc" + std::to_string(i));
        auto& b = m.enc[i];
        b.kernels = init_fan_in({c_out, c_in, k, k, k}, c_in * k * k * k, rng);
        b.gamma = Tensor::full({c_out}, 1.0, true);
        b.beta = Tensor::zeros({c_out}, true);
        b.bn.running_mean = Tensor::zeros({c_out});
        b.bn.running_var = Tensor::full({c_out}, 1.0);
        c_in = c_out;
    }
    {
        Prng rng = root.derive("latent");
        m.latent_w = init_fan_in({cfg.latent_dim, cfg.flat_dim()}, cfg.flat_dim(), rng);
        m.latent_b = Tensor::zeros({cfg.latent_dim}, true);
    }
    // decoder mirrors the encoder channel ladder back down to one channel
    const std::size_t dec_in[3] = {cfg.channels[2], cfg.channels[1], cfg.channels[0]};
    const std::size_t dec_out[3] = {cfg.channels[1], cfg.channels[0], 1};
    for (std::size_t i = 0; i < 3; ++i) {
        Prng rng = root.derive("dec" + std::to_string(i));
        auto& d = m.dec[i];
        d.kernels = init_fan_in({dec_out[i], dec_in[i], k, k, k}, dec_in[i] * k * k * k, rng);
        d.bias = Tensor::zeros({dec_out[i]}, true);
    }
    return m;
}

AutoencoderOutput autoencoder_forward(AutoencoderModel& model, const Tensor& x, bool train) {
    const auto& cfg = model.cfg;
    if (x.rank() != 4 || x.dim(0) != 1 || x.dim(1) != cfg.depth || x.dim(2) != cfg.height ||
        x.dim(3) != cfg.width) {
        throw DimensionError("autoencoder_forward: input " + shape_str(x.shape()) +
                             " does not match configured [1x" + std::to_string(cfg.depth) + "x" +
                             std::to_string(cfg.height) + "x" + std::to_string(cfg.width) + "]");
    }
    Tensor h = x;
    for (auto& b : model.enc) {
        h = conv3d(h, b.kernels, cfg.padding());
        Shape s = h.shape();
        h = reshape(h, {1, s[0], s[1], s[2], s[3]});
        h = batchnorm3d(h, b.gamma, b.beta, b.bn, train);
        h = reshape(h, s);
        h = relu(h);
        h = maxpool3d(h, cfg.pool);
    }
    Tensor latent = fully_connected(reshape(h, {cfg.flat_dim()}), model.latent_w, model.latent_b);

    Tensor d = h;
    for (std::size_t i = 0; i < 3; ++i) {
        d = upsample_nearest3d(d, cfg.pool);
        d = conv3d(d, model.dec[i].kernels, cfg.padding());
        d = add_channel_bias(d, model.dec[i].bias);
        if (i + 1 < 3) d = relu(d);
    }
    return {d, latent};
}

AeTrainResult train_autoencoder(std::span<const VolumeSample> train_samples,
                                AutoencoderModel& model, const AeTrainOptions& opts) {
    if (train_samples.empty()) throw ContractError("train_autoencoder: empty dataset");
    if (opts.epochs < 1) throw ContractError("train_autoencoder: epochs must be >= 1");

    std::vector<Tensor> clean;
    clean.reserve(train_samples.size());
    for (const auto& s : train_samples) {
        Tensor norm = min_max_normalize_volume(s.volume);
        clean.push_back(reshape(norm, {1, s.volume.dim(0), s.volume.dim(1), s.volume.dim(2)}));
    }

    Adam opt(model.trainable_params());
    Prng noise_root = Prng(opts.seed).derive("noise");

    AeTrainResult result;
    result.loss_trace.reserve(opts.epochs);
    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        const double lr = cosine_lr(epoch, opts.epochs, opts.lr, opts.min_lr);
        double epoch_loss = 0.0;
        for (std::size_t i = 0; i < clean.size(); ++i) {
            std::uint64_t noise_seed = noise_root.derive(epoch).derive(i).next_u64();
            Tensor noisy = add_noise(clean[i], noise_seed);
            auto out = autoencoder_forward(model, noisy, true);
            Tensor loss = mse_loss(out.reconstruction, clean[i]);
            epoch_loss += loss.item();
            opt.zero_grad();
            loss.backward();
            opt.step(lr);
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(clean.size()));
    }
    return result;
}

FeatureMatrix extract_features(AutoencoderModel& model, std::span<const VolumeSample> samples) {
    FeatureMatrix fm;
    fm.rows.reserve(samples.size());
    for (const auto& s : samples) {
        Tensor norm = min_max_normalize_volume(s.volume);
        Tensor x = reshape(norm, {1, s.volume.dim(0), s.volume.dim(1), s.volume.dim(2)});
        auto out = autoencoder_forward(model, x, false);
        auto lat = out.latent.data();
        fm.rows.push_back({s.sample_id, s.label, std::vector<double>(lat.begin(), lat.end())});
    }
    return fm;
}

} // namespace bgrl
