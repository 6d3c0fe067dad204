#pragma once

#include "bgrl/bgnn.hpp"
#include "bgrl/config.hpp"
#include "bgrl/dataset.hpp"
#include "bgrl/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bgrl {

struct AggregateStat {
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation, 0 for a single seed
};

struct SeedResult {
    std::uint64_t seed = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double final_train_loss = 0.0;
    ConfusionMatrix cm;
    MetricSet metric_set;
    // one entry per task class; empty optional when the class had no test records
    std::vector<std::optional<AveragedWeights>> weights_per_class;
};

struct EvaluationReport {
    Task task;
    WeightMode mode = WeightMode::Learned;
    std::vector<std::string> gene_subset;
    std::vector<std::uint64_t> seeds;
    RunConfig config;

    std::vector<SeedResult> per_seed;
    AggregateStat accuracy, f1_positive, recall_positive, precision_positive, macro_f1,
        weighted_f1;
};

// One full pipeline evaluation per seed: split, fit and apply min-max
// normalization on the train rows, build subgraphs, train the GNN, evaluate
// the held-out subgraphs, and average the learned edge weights per class.
// The report aggregates mean and standard deviation across seeds.
EvaluationReport run_experiment(const GeneExpressionTable& genes, const FeatureMatrix& images,
                                const Task& task, WeightMode mode,
                                const std::vector<std::string>& gene_subset,
                                const std::vector<std::uint64_t>& seeds, const RunConfig& config);

// Single-seed evaluation of an already-trained model against an existing
// partition (the eval / report-weights surface).
SeedResult evaluate_trained(const GeneExpressionTable& genes, const FeatureMatrix& images,
                            const BgnnModel& model, const Task& task,
                            const std::vector<std::string>& gene_subset,
                            const std::vector<std::string>& train_ids,
                            const std::vector<std::string>& test_ids, std::uint64_t seed);

struct AblationRow {
    WeightMode mode = WeightMode::Learned;
    std::vector<std::string> gene_subset;
    EvaluationReport report;
};

struct AblationTable {
    Task task;
    std::vector<std::uint64_t> seeds;
    std::vector<AblationRow> rows; // {learned, unit} x {full, pairs} = 8 rows
};

// Runs the {learned, unit} x {all genes, each two-gene permutation} grid.
// `jobs` bounds the number of grid cells trained in parallel; results do not
// depend on it.
AblationTable ablation_suite(const GeneExpressionTable& genes, const FeatureMatrix& images,
                             const Task& task, const std::vector<std::uint64_t>& seeds,
                             const RunConfig& config, std::size_t jobs = 1);

// Serialization. JSON output is deterministic (sorted keys, shortest
// round-trip numbers, no timestamps).
std::string report_to_json(const EvaluationReport& report);
std::string report_to_text(const EvaluationReport& report);
std::string ablation_to_json(const AblationTable& table);
std::string ablation_to_text(const AblationTable& table);

} // namespace bgrl
