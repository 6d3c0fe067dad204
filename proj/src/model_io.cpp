#include "bgrl/model_io.hpp"

#include "bgrl/errors.hpp"
#include "bgrl/io.hpp"

namespace bgrl {

namespace {

Tensor meta_scalar(double v) { return Tensor::scalar(v); }

Tensor param_copy(const Tensor& t, bool requires_grad) {
    Tensor c = Tensor::from_data(t.shape(), std::vector<double>(t.data().begin(), t.data().end()));
    c.set_requires_grad(requires_grad);
    return c;
}

} // namespace

void save_bgnn_checkpoint(const std::string& path, const BgnnModel& model, const Task& task,
                          std::uint64_t seed) {
    Checkpoint ckpt;
    ckpt.add("meta/task", meta_scalar(static_cast<double>(task.kind)));
    ckpt.add("meta/mode", meta_scalar(model.config.mode == WeightMode::Unit ? 1.0 : 0.0));
    ckpt.add("meta/include_self", meta_scalar(model.config.include_self ? 1.0 : 0.0));
    ckpt.add("meta/train_alpha", meta_scalar(model.config.train_alpha ? 1.0 : 0.0));
    ckpt.add("meta/seed", meta_scalar(static_cast<double>(seed)));
    ckpt.add("alpha", model.alpha);
    for (std::size_t t = 0; t < model.config.genes.size(); ++t) {
        const auto& name = model.config.genes[t].name;
        ckpt.add("phi/" + name, model.phi[t]);
        ckpt.add("v/" + name, model.v_gene[t]);
    }
    ckpt.add("v/image", model.v_image);
    ckpt.add("head/w", model.head_w);
    ckpt.add("head/b", model.head_b);
    write_checkpoint(path, ckpt);
}

LoadedBgnn load_bgnn_checkpoint(const std::string& path) {
    Checkpoint ckpt = read_checkpoint(path);
    LoadedBgnn out;
    out.task.kind = static_cast<TaskKind>(static_cast<int>(ckpt.require_scalar("meta/task")));
    out.seed = static_cast<std::uint64_t>(ckpt.require_scalar("meta/seed"));

    BgnnModel& m = out.model;
    m.config.mode = ckpt.require_scalar("meta/mode") != 0.0 ? WeightMode::Unit
                                                            : WeightMode::Learned;
    m.config.include_self = ckpt.require_scalar("meta/include_self") != 0.0;
    m.config.train_alpha = ckpt.require_scalar("meta/train_alpha") != 0.0;

    m.alpha = param_copy(ckpt.require("alpha"), m.config.train_alpha);
    m.config.a_dim = m.alpha.numel();
    m.v_image = param_copy(ckpt.require("v/image"), true);
    m.config.d_h = m.v_image.dim(0);
    m.config.image_dim = m.v_image.dim(1);
    m.head_w = param_copy(ckpt.require("head/w"), true);
    m.head_b = param_copy(ckpt.require("head/b"), true);
    m.config.n_classes = static_cast<int>(m.head_w.dim(0));

    for (const auto& spec : gene_catalog()) {
        const Tensor* phi = ckpt.find("phi/" + spec.name);
        const Tensor* v = ckpt.find("v/" + spec.name);
        if (!phi && !v) continue;
        if (!phi || !v) throw ParseError(path + ": incomplete parameters for gene " + spec.name);
        m.config.genes.push_back(spec);
        m.phi.push_back(param_copy(*phi, true));
        m.v_gene.push_back(param_copy(*v, true));
    }
    if (m.config.genes.empty()) throw ParseError(path + ": checkpoint has no gene parameters");
    return out;
}

void save_autoencoder_checkpoint(const std::string& path, const AutoencoderModel& model) {
    Checkpoint ckpt;
    const auto& cfg = model.cfg;
    ckpt.add("meta/dims", Tensor::from_data({3}, {static_cast<double>(cfg.depth),
                                                  static_cast<double>(cfg.height),
                                                  static_cast<double>(cfg.width)}));
    ckpt.add("meta/pool", meta_scalar(static_cast<double>(cfg.pool)));
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string p = "enc" + std::to_string(i) + "/";
        ckpt.add(p + "kernels", model.enc[i].kernels);
        ckpt.add(p + "gamma", model.enc[i].gamma);
        ckpt.add(p + "beta", model.enc[i].beta);
        ckpt.add(p + "running_mean", model.enc[i].bn.running_mean);
        ckpt.add(p + "running_var", model.enc[i].bn.running_var);
    }
    ckpt.add("latent/w", model.latent_w);
    ckpt.add("latent/b", model.latent_b);
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string p = "dec" + std::to_string(i) + "/";
        ckpt.add(p + "kernels", model.dec[i].kernels);
        ckpt.add(p + "bias", model.dec[i].bias);
    }
    write_checkpoint(path, ckpt);
}

AutoencoderModel load_autoencoder_checkpoint(const std::string& path) {
    Checkpoint ckpt = read_checkpoint(path);
    AutoencoderModel m;
    Tensor dims = ckpt.require("meta/dims");
    if (dims.numel() != 3) throw ParseError(path + ": bad meta/dims");
    m.cfg.depth = static_cast<std::size_t>(dims.data()[0]);
    m.cfg.height = static_cast<std::size_t>(dims.data()[1]);
    m.cfg.width = static_cast<std::size_t>(dims.data()[2]);
    m.cfg.pool = static_cast<std::size_t>(ckpt.require_scalar("meta/pool"));
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string p = "enc" + std::to_string(i) + "/";
        m.enc[i].kernels = param_copy(ckpt.require(p + "kernels"), true);
        m.enc[i].gamma = param_copy(ckpt.require(p + "gamma"), true);
        m.enc[i].beta = param_copy(ckpt.require(p + "beta"), true);
        m.enc[i].bn.running_mean = param_copy(ckpt.require(p + "running_mean"), false);
        m.enc[i].bn.running_var = param_copy(ckpt.require(p + "running_var"), false);
        m.cfg.channels[i] = m.enc[i].kernels.dim(0);
    }
    m.cfg.kernel = m.enc[0].kernels.dim(2);
    m.latent_w = param_copy(ckpt.require("latent/w"), true);
    m.latent_b = param_copy(ckpt.require("latent/b"), true);
    m.cfg.latent_dim = m.latent_w.dim(0);
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string p = "dec" + std::to_string(i) + "/";
        m.dec[i].kernels = param_copy(ckpt.require(p + "kernels"), true);
        m.dec[i].bias = param_copy(ckpt.require(p + "bias"), true);
    }
    return m;
}

} // namespace bgrl
