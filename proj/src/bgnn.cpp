#include "bgrl/bgnn.hpp"

#include "bgrl/errors.hpp"
#include "bgrl/optim.hpp"
#include "bgrl/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace bgrl {

WeightMode weight_mode_from_name(const std::string& name) {
    std::string u;
    for (char c : name) u += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (u == "learned") return WeightMode::Learned;
    if (u == "unit") return WeightMode::Unit;
    throw ConfigError("unknown weight mode '" + name + "' (expected learned or unit)");
}

std::string weight_mode_name(WeightMode mode) {
    return mode == WeightMode::Learned ? "learned" : "unit";
}

std::vector<Tensor> BgnnModel::trainable_params() const {
    std::vector<Tensor> out;
    if (config.train_alpha) out.push_back(alpha);
    for (const auto& p : phi) out.push_back(p);
    for (const auto& v : v_gene) out.push_back(v);
    out.push_back(v_image);
    out.push_back(head_w);
    out.push_back(head_b);
    return out;
}

Tensor BgnnModel::edge_matrix(std::size_t type_index) const {
    const auto& spec = config.genes.at(type_index);
    Tensor z_flat = matmul(phi[type_index], reshape(alpha, {config.a_dim, 1}));
    return reshape(z_flat, {spec.dim, config.image_dim});
}

BgnnModel init_model(const BgnnConfig& config, std::uint64_t seed) {
    if (config.genes.empty()) throw ConfigError("init_model: gene list must not be empty");
    BgnnModel m;
    m.config = config;
    Prng root(seed);

    m.alpha = seeded_randn({config.a_dim}, root.derive("alpha").next_u64());
    m.alpha.set_requires_grad(config.train_alpha);

    for (const auto& spec : config.genes) {
        Prng phi_rng = root.derive("phi").derive(spec.name);
        m.phi.push_back(
            init_fan_in({spec.dim * config.image_dim, config.a_dim}, config.a_dim, phi_rng));
        Prng v_rng = root.derive("v").derive(spec.name);
        m.v_gene.push_back(init_fan_in({config.d_h, spec.dim}, spec.dim, v_rng));
    }
    {
        Prng rng = root.derive("v").derive("image");
        m.v_image = init_fan_in({config.d_h, config.image_dim}, config.image_dim, rng);
    }
    {
        Prng rng = root.derive("head");
        m.head_w = init_fan_in({static_cast<std::size_t>(config.n_classes), config.d_h},
                               config.d_h, rng);
        m.head_b = init_fan_in({static_cast<std::size_t>(config.n_classes)}, config.d_h, rng);
    }
    return m;
}

Tensor edge_weight(const Tensor& x_p, const Tensor& z_t, const Tensor& x_img) {
    if (x_p.rank() != 1 || x_img.rank() != 1 || z_t.rank() != 2 || z_t.dim(0) != x_p.dim(0) ||
        z_t.dim(1) != x_img.dim(0)) {
        throw DimensionError("edge_weight: z " + shape_str(z_t.shape()) + " does not connect x_p " +
                             shape_str(x_p.shape()) + " to x_img " + shape_str(x_img.shape()));
    }
    Tensor zx = matmul(z_t, reshape(x_img, {x_img.dim(0), 1})); // [d_p x 1]
    Tensor pre = dot(reshape(zx, {x_p.dim(0)}), x_p);
    return relu(pre);
}

namespace {

const GeneNode& find_gene_node(const BipartiteSubgraph& sg, const GeneSpec& spec) {
    for (const auto& node : sg.genes) {
        if (node.name == spec.name) {
            if (node.features.numel() != spec.dim) {
                throw DimensionError("aggregate: gene " + spec.name + " has dim " +
                                     std::to_string(node.features.numel()) + ", model expects " +
                                     std::to_string(spec.dim));
            }
            return node;
        }
    }
    throw DimensionError("aggregate: subgraph " + sg.sample_id + " has no gene node " + spec.name);
}

// Shared forward with precomputed z tensors so full-batch training maps
// phi(alpha) once per epoch instead of once per sample.
Tensor aggregate_with_z(const BipartiteSubgraph& sg, const BgnnModel& model,
                        const std::vector<Tensor>& z) {
    const auto& cfg = model.config;
    if (sg.image.numel() != cfg.image_dim) {
        throw DimensionError("aggregate: image features " + shape_str(sg.image.shape()) +
                             " do not match model image_dim " + std::to_string(cfg.image_dim));
    }
    Tensor h_img = fully_connected(sg.image, model.v_image);
    Tensor acc;
    for (std::size_t t = 0; t < cfg.genes.size(); ++t) {
        const GeneNode& node = find_gene_node(sg, cfg.genes[t]);
        Tensor h_g = fully_connected(node.features, model.v_gene[t]);
        Tensor message;
        if (cfg.mode == WeightMode::Learned) {
            Tensor e = edge_weight(node.features, z[t], sg.image);
            message = scalar_mul(e, h_g);
        } else {
            message = h_g; // unit weight
        }
        acc = acc.defined() ? add(acc, message) : message;
    }
    if (cfg.include_self) acc = acc.defined() ? add(h_img, acc) : h_img;
    return relu(acc);
}

std::vector<Tensor> edge_matrices(const BgnnModel& model) {
    std::vector<Tensor> z;
    if (model.config.mode == WeightMode::Learned) {
        z.reserve(model.config.genes.size());
        for (std::size_t t = 0; t < model.config.genes.size(); ++t)
            z.push_back(model.edge_matrix(t));
    }
    return z;
}

} // namespace

Tensor aggregate(const BipartiteSubgraph& sg, const BgnnModel& model) {
    return aggregate_with_z(sg, model, edge_matrices(model));
}

Tensor predict_scores(const BipartiteSubgraph& sg, const BgnnModel& model) {
    return fully_connected(aggregate(sg, model), model.head_w, model.head_b);
}

int predict_class(const BipartiteSubgraph& sg, const BgnnModel& model) {
    return static_cast<int>(argmax(predict_scores(sg, model)));
}

GnnTrainResult train_gnn(const std::vector<BipartiteSubgraph>& subgraphs,
                         const std::vector<int>& targets, BgnnModel& model,
                         const GnnTrainOptions& opts) {
    if (subgraphs.empty()) throw ContractError("train_gnn: empty train set");
    if (subgraphs.size() != targets.size()) {
        throw ContractError("train_gnn: " + std::to_string(subgraphs.size()) + " subgraphs vs " +
                            std::to_string(targets.size()) + " targets");
    }
    const auto n_classes = static_cast<std::size_t>(model.config.n_classes);
    std::vector<Tensor> onehot;
    onehot.reserve(targets.size());
    for (int t : targets) {
        if (t < 0 || t >= model.config.n_classes) {
            throw ContractError("train_gnn: target " + std::to_string(t) + " out of range");
        }
        std::vector<double> row(n_classes, 0.0);
        row[static_cast<std::size_t>(t)] = 1.0;
        onehot.push_back(Tensor::from_data({n_classes}, std::move(row)));
    }

    Adam opt(model.trainable_params());
    GnnTrainResult result;
    result.loss_trace.reserve(opts.epochs);
    const double inv_n = 1.0 / static_cast<double>(subgraphs.size());
    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        auto z = edge_matrices(model);
        Tensor total;
        for (std::size_t i = 0; i < subgraphs.size(); ++i) {
            Tensor h = aggregate_with_z(subgraphs[i], model, z);
            Tensor scores = fully_connected(h, model.head_w, model.head_b);
            Tensor sample_loss = mse_loss(scores, onehot[i]);
            total = total.defined() ? add(total, sample_loss) : sample_loss;
        }
        Tensor loss = scale(total, inv_n);
        result.loss_trace.push_back(loss.item());
        opt.zero_grad();
        loss.backward();
        opt.step(cosine_lr(epoch, opts.epochs, opts.lr, 0.0));
    }
    return result;
}

std::vector<EdgeWeightRecord> collect_edge_weights(const std::vector<BipartiteSubgraph>& test_set,
                                                   const std::vector<int>& targets,
                                                   const BgnnModel& model) {
    if (test_set.size() != targets.size()) {
        throw ContractError("collect_edge_weights: subgraph/target count mismatch");
    }
    auto z = edge_matrices(model);
    std::vector<EdgeWeightRecord> records;
    records.reserve(test_set.size());
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        const auto& sg = test_set[i];
        EdgeWeightRecord rec;
        rec.sample_id = sg.sample_id;
        rec.truth = targets[i];
        rec.predicted = predict_class(sg, model);
        for (std::size_t t = 0; t < model.config.genes.size(); ++t) {
            const auto& spec = model.config.genes[t];
            double w = 1.0;
            if (model.config.mode == WeightMode::Learned) {
                const GeneNode& node = find_gene_node(sg, spec);
                w = edge_weight(node.features, z[t], sg.image).item();
            }
            rec.weights[spec.name] = w;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

AveragedWeights average_weights(const std::vector<EdgeWeightRecord>& records,
                                int class_of_interest, const BgnnConfig& config) {
    AveragedWeights out;
    out.class_index = class_of_interest;
    std::map<std::string, double> sums;
    for (const auto& spec : config.genes) sums[spec.name] = 0.0;
    for (const auto& rec : records) {
        if (rec.truth != class_of_interest) continue;
        ++out.n_records;
        for (const auto& spec : config.genes) {
            auto it = rec.weights.find(spec.name);
            if (it == rec.weights.end()) {
                throw ContractError("average_weights: record " + rec.sample_id +
                                    " is missing gene " + spec.name);
            }
            sums[spec.name] += it->second;
        }
    }
    if (out.n_records == 0) {
        throw UndefinedAverageError("average_weights: no records with class " +
                                    std::to_string(class_of_interest));
    }
    for (const auto& spec : config.genes) {
        out.as_written[spec.name] = sums[spec.name] / static_cast<double>(spec.dim);
        out.per_sample_mean[spec.name] = sums[spec.name] / static_cast<double>(out.n_records);
    }
    return out;
}

} // namespace bgrl
