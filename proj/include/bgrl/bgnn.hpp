#pragma once

#include "bgrl/dataset.hpp"
#include "bgrl/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bgrl {

enum class WeightMode { Learned, Unit };

WeightMode weight_mode_from_name(const std::string& name);
std::string weight_mode_name(WeightMode mode);

struct BgnnConfig {
    std::vector<GeneSpec> genes;  // edge/node types, canonical order
    std::size_t image_dim = 512;
    std::size_t a_dim = 16;
    std::size_t d_h = 64;
    int n_classes = 2;
    bool include_self = true;   // add the image embedding before the ReLU
    bool train_alpha = false;   // the prior stays frozen by default
    WeightMode mode = WeightMode::Learned;
};

// Heterogeneous bipartite GNN. A fixed Gaussian prior alpha is mapped by a
// learnable function phi_t to a bilinear matrix z_t per edge type; the edge
// weight is ReLU(x_g^T z_t x_img). Each node type has its own embedding map
// V_p into a common d_h space; the image node's updated embedding is
// ReLU(h_img + sum_g e_g * h_g) and feeds the prediction head.
struct BgnnModel {
    BgnnConfig config;
    Tensor alpha;               // [a_dim], excluded from the optimizer unless train_alpha
    std::vector<Tensor> phi;    // per edge type: [d_g*image_dim x a_dim]
    std::vector<Tensor> v_gene; // per gene type: [d_h x d_g]
    Tensor v_image;             // [d_h x image_dim]
    Tensor head_w;              // [n_classes x d_h]
    Tensor head_b;              // [n_classes]

    std::vector<Tensor> trainable_params() const;
    // z_t = reshape(phi_t . alpha, [d_g x image_dim]), recorded on the tape
    Tensor edge_matrix(std::size_t type_index) const;
};

BgnnModel init_model(const BgnnConfig& config, std::uint64_t seed);

// ReLU(x_p^T . z_t . x_img); differentiable in all three arguments.
Tensor edge_weight(const Tensor& x_p, const Tensor& z_t, const Tensor& x_img);

// Single message-passing round over one subgraph. Gene contributions are
// summed in the model's canonical gene order, so node order in the subgraph
// does not affect the result.
Tensor aggregate(const BipartiteSubgraph& sg, const BgnnModel& model);

// head(aggregate(sg)); class scores, argmax ties to the lower index.
Tensor predict_scores(const BipartiteSubgraph& sg, const BgnnModel& model);
int predict_class(const BipartiteSubgraph& sg, const BgnnModel& model);

struct GnnTrainOptions {
    std::size_t epochs = 800;
    double lr = 9e-3; // base rate; cosine-annealed to zero over the run
};

struct GnnTrainResult {
    std::vector<double> loss_trace;
};

// Full-batch training: mean MSE between score vectors and one-hot targets,
// Adam with the learning rate cosine-annealed to zero. targets[i] is the
// class index of subgraphs[i]. alpha is excluded from the optimizer unless
// train_alpha.
GnnTrainResult train_gnn(const std::vector<BipartiteSubgraph>& subgraphs,
                         const std::vector<int>& targets, BgnnModel& model,
                         const GnnTrainOptions& opts);

struct EdgeWeightRecord {
    std::string sample_id;
    std::map<std::string, double> weights; // per gene name; >= 0 after the ReLU
    int predicted = 0;
    int truth = 0;
};

std::vector<EdgeWeightRecord> collect_edge_weights(const std::vector<BipartiteSubgraph>& test_set,
                                                   const std::vector<int>& targets,
                                                   const BgnnModel& model);

// Per-gene averaged edge weights over one class's records. `as_written`
// divides the weight sum by the gene's feature dimension d_p; the companion
// `per_sample_mean` divides by the record count N.
struct AveragedWeights {
    int class_index = 0;
    std::size_t n_records = 0;
    std::map<std::string, double> as_written;      // sum w / d_p
    std::map<std::string, double> per_sample_mean; // sum w / N
};

AveragedWeights average_weights(const std::vector<EdgeWeightRecord>& records,
                                int class_of_interest, const BgnnConfig& config);

} // namespace bgrl
