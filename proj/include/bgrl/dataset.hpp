#pragma once

#include "bgrl/tensor.hpp"
#include "bgrl/volume.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bgrl {

// The three driver genes, in canonical order, with their feature dims.
struct GeneSpec {
    std::string name;
    std::size_t dim;
};

const std::vector<GeneSpec>& gene_catalog(); // APOE:1, PSEN1:4, PSEN2:4

// Case-insensitive lookup into the catalog; throws ConfigError on unknown names.
std::vector<GeneSpec> resolve_gene_subset(const std::vector<std::string>& names);

struct GeneRow {
    std::string sample_id;
    Cls label = Cls::CN;
    std::vector<double> apoe;  // dim 1
    std::vector<double> psen1; // dim 4
    std::vector<double> psen2; // dim 4

    const std::vector<double>& gene(const std::string& name) const;
};

struct GeneExpressionTable {
    std::vector<GeneRow> rows;
    std::vector<std::string> excluded_ids; // rows dropped for missing values
};

// Exact header:
// sample_id,label,apoe_1,psen1_1,psen1_2,psen1_3,psen1_4,psen2_1,psen2_2,psen2_3,psen2_4
GeneExpressionTable load_gene_csv(const std::string& path);

// Per-column min/max over the train rows only; frozen and reused for test
// rows. A constant column maps to 0; out-of-range test values are not clipped.
struct GeneNormStats {
    std::array<double, 9> min{};
    std::array<double, 9> max{};
};

GeneNormStats fit_min_max(const GeneExpressionTable& table,
                          const std::vector<std::string>& train_ids);
GeneExpressionTable apply_min_max(const GeneExpressionTable& table, const GeneNormStats& stats);

// Per-sample 4-node star: gene nodes wired to the image node by typed edges.
struct GeneNode {
    std::string name;
    Tensor features;
};

struct BipartiteSubgraph {
    std::string sample_id;
    std::vector<GeneNode> genes; // one node (and edge) per gene in the subset
    Tensor image;                // [latent_dim]
    Cls label = Cls::CN;
};

struct SubgraphBuildResult {
    std::vector<BipartiteSubgraph> subgraphs; // sorted by sample_id
    std::vector<std::string> skipped_ids;     // present in one table only
};

SubgraphBuildResult build_subgraphs(const GeneExpressionTable& genes, const FeatureMatrix& images,
                                    const std::vector<std::string>& gene_subset);

// Classification tasks; binary tasks map the disease-positive class to 1.
enum class TaskKind { AdVsCn, AdVsMci, CnVsMci, ThreeWay };

struct Task {
    TaskKind kind = TaskKind::AdVsCn;

    static Task from_name(const std::string& name);
    std::string name() const;
    int n_classes() const;
    bool includes(Cls c) const;
    int target_of(Cls c) const;      // 0-based class index for this task
    int positive_class() const;      // reported class (binary: the disease class)
    std::string class_name(int target) const;
};

struct DatasetPartition {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;
    Task task;

    bool is_train(const std::string& id) const;
    bool is_test(const std::string& id) const;
};

// Stratified, seeded 80-20 split over (id, class) pairs. Binary tasks filter
// to their two classes first. |test| = round(0.2 * N) with per-class
// proportions preserved within one sample. Requires >= 2 samples per class.
DatasetPartition split_ids(const std::vector<std::pair<std::string, Cls>>& items,
                           std::uint64_t seed, const Task& task, double train_fraction = 0.8);

DatasetPartition split_dataset(const std::vector<BipartiteSubgraph>& subgraphs,
                               std::uint64_t seed, const Task& task,
                               double train_fraction = 0.8);

// Synthetic radiogenomic dataset with planted signal. Per sample: class y is
// balanced CN/AD, latent u = signal * (2y - 1); each carrier gene gets
// u * direction + N(0, 0.3) noise, non-carriers pure N(0,1); image features
// are u * direction plus a per-element N(0,1) noise term over 512 dims. The
// image noise shares one latent factor across coordinates (each element is
// marginally N(0,1)) so the block behaves like the low-rank autoencoder
// latents it stands in for. Deterministic per seed.
struct SyntheticData {
    GeneExpressionTable genes;
    FeatureMatrix images;
    std::vector<std::pair<std::string, Cls>> truth;
};

inline constexpr std::size_t kSyntheticImageDim = 512;
inline constexpr double kSyntheticCarrierNoise = 0.3;
inline constexpr double kSyntheticImageDirNorm = 4.0;

SyntheticData generate_synthetic(std::size_t n, std::uint64_t seed, double signal,
                                 const std::vector<std::string>& carrier_genes);

} // namespace bgrl
