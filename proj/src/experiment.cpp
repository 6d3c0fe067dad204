#include "bgrl/experiment.hpp"

#include "bgrl/errors.hpp"
#include "bgrl/optim.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace bgrl {

using nlohmann::json;

namespace {

AggregateStat aggregate(const std::vector<double>& values) {
    AggregateStat s;
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double acc = 0.0;
        for (double v : values) acc += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(acc / static_cast<double>(values.size() - 1));
    }
    return s;
}

BgnnConfig make_bgnn_config(const RunConfig& config, const Task& task, WeightMode mode,
                            const std::vector<std::string>& gene_subset, std::size_t image_dim) {
    BgnnConfig cfg;
    cfg.genes = resolve_gene_subset(gene_subset);
    cfg.image_dim = image_dim;
    cfg.a_dim = config.a_dim;
    cfg.d_h = config.d_h;
    cfg.n_classes = task.n_classes();
    cfg.include_self = config.include_self;
    cfg.train_alpha = config.train_alpha;
    cfg.mode = mode;
    return cfg;
}

struct SplitView {
    std::vector<BipartiteSubgraph> train, test;
    std::vector<int> train_targets, test_targets;
};

SplitView partition_subgraphs(const std::vector<BipartiteSubgraph>& subgraphs, const Task& task,
                              const std::vector<std::string>& train_ids,
                              const std::vector<std::string>& test_ids) {
    std::unordered_set<std::string> train(train_ids.begin(), train_ids.end());
    std::unordered_set<std::string> test(test_ids.begin(), test_ids.end());
    SplitView view;
    for (const auto& sg : subgraphs) {
        if (train.count(sg.sample_id)) {
            view.train.push_back(sg);
            view.train_targets.push_back(task.target_of(sg.label));
        } else if (test.count(sg.sample_id)) {
            view.test.push_back(sg);
            view.test_targets.push_back(task.target_of(sg.label));
        }
    }
    return view;
}

std::vector<std::optional<AveragedWeights>> weights_by_class(
    const std::vector<EdgeWeightRecord>& records, const BgnnConfig& cfg, const Task& task) {
    std::vector<std::optional<AveragedWeights>> out(static_cast<std::size_t>(task.n_classes()));
    for (int c = 0; c < task.n_classes(); ++c) {
        bool has_class = false;
        for (const auto& rec : records) has_class = has_class || rec.truth == c;
        if (has_class) out[static_cast<std::size_t>(c)].emplace(average_weights(records, c, cfg));
    }
    return out;
}

SeedResult run_single(const GeneExpressionTable& genes, const FeatureMatrix& images,
                      const Task& task, WeightMode mode,
                      const std::vector<std::string>& gene_subset, std::uint64_t seed,
                      const RunConfig& config) {
    // split on the id intersection, before normalization
    std::unordered_set<std::string> image_ids;
    for (const auto& r : images.rows) image_ids.insert(r.sample_id);
    std::vector<std::pair<std::string, Cls>> items;
    for (const auto& row : genes.rows) {
        if (image_ids.count(row.sample_id)) items.emplace_back(row.sample_id, row.label);
    }
    if (items.empty()) throw EmptyDatasetError("run_experiment: no sample ids matched");
    DatasetPartition part = split_ids(items, seed, task, config.train_fraction);

    // min-max statistics frozen on the train rows only
    GeneNormStats stats = fit_min_max(genes, part.train_ids);
    GeneExpressionTable norm = apply_min_max(genes, stats);

    auto built = build_subgraphs(norm, images, gene_subset);
    SplitView view = partition_subgraphs(built.subgraphs, task, part.train_ids, part.test_ids);

    BgnnConfig bgnn_cfg =
        make_bgnn_config(config, task, mode, gene_subset, images.rows.at(0).values.size());
    BgnnModel model = init_model(bgnn_cfg, seed);

    GnnTrainOptions opts;
    opts.epochs = config.epochs_gnn;
    opts.lr = config.lr_gnn;
    auto train_result = train_gnn(view.train, view.train_targets, model, opts);

    SeedResult result;
    result.seed = seed;
    result.n_train = view.train.size();
    result.n_test = view.test.size();
    result.final_train_loss = train_result.loss_trace.back();

    std::vector<int> predictions;
    predictions.reserve(view.test.size());
    for (const auto& sg : view.test) predictions.push_back(predict_class(sg, model));
    result.cm = confusion(view.test_targets, predictions, task.n_classes());
    result.metric_set = metrics(result.cm, task.positive_class());

    auto records = collect_edge_weights(view.test, view.test_targets, model);
    result.weights_per_class = weights_by_class(records, bgnn_cfg, task);
    return result;
}

void fill_aggregates(EvaluationReport& report) {
    std::vector<double> acc, f1, rec, prec, macro, weighted;
    for (const auto& r : report.per_seed) {
        acc.push_back(r.metric_set.accuracy);
        f1.push_back(r.metric_set.positive().f1);
        rec.push_back(r.metric_set.positive().recall);
        prec.push_back(r.metric_set.positive().precision);
        macro.push_back(r.metric_set.macro_f1);
        weighted.push_back(r.metric_set.weighted_f1);
    }
    report.accuracy = aggregate(acc);
    report.f1_positive = aggregate(f1);
    report.recall_positive = aggregate(rec);
    report.precision_positive = aggregate(prec);
    report.macro_f1 = aggregate(macro);
    report.weighted_f1 = aggregate(weighted);
}

} // namespace

EvaluationReport run_experiment(const GeneExpressionTable& genes, const FeatureMatrix& images,
                                const Task& task, WeightMode mode,
                                const std::vector<std::string>& gene_subset,
                                const std::vector<std::uint64_t>& seeds,
                                const RunConfig& config) {
    if (seeds.empty()) throw ContractError("run_experiment: at least one seed is required");
    EvaluationReport report;
    report.task = task;
    report.mode = mode;
    report.gene_subset = gene_subset;
    report.seeds = seeds;
    report.config = config;
    for (std::uint64_t seed : seeds) {
        report.per_seed.push_back(
            run_single(genes, images, task, mode, gene_subset, seed, config));
    }
    fill_aggregates(report);
    return report;
}

SeedResult evaluate_trained(const GeneExpressionTable& genes, const FeatureMatrix& images,
                            const BgnnModel& model, const Task& task,
                            const std::vector<std::string>& gene_subset,
                            const std::vector<std::string>& train_ids,
                            const std::vector<std::string>& test_ids, std::uint64_t seed) {
    GeneNormStats stats = fit_min_max(genes, train_ids);
    GeneExpressionTable norm = apply_min_max(genes, stats);
    auto built = build_subgraphs(norm, images, gene_subset);
    SplitView view = partition_subgraphs(built.subgraphs, task, train_ids, test_ids);
    if (view.test.empty()) throw EmptyDatasetError("evaluate_trained: no test subgraphs");

    SeedResult result;
    result.seed = seed;
    result.n_train = view.train.size();
    result.n_test = view.test.size();

    std::vector<int> predictions;
    predictions.reserve(view.test.size());
    for (const auto& sg : view.test) predictions.push_back(predict_class(sg, model));
    result.cm = confusion(view.test_targets, predictions, task.n_classes());
    result.metric_set = metrics(result.cm, task.positive_class());

    auto records = collect_edge_weights(view.test, view.test_targets, model);
    result.weights_per_class = weights_by_class(records, model.config, task);
    return result;
}

AblationTable ablation_suite(const GeneExpressionTable& genes, const FeatureMatrix& images,
                             const Task& task, const std::vector<std::uint64_t>& seeds,
                             const RunConfig& config, std::size_t jobs) {
    static const std::vector<std::vector<std::string>> subsets = {
        {"APOE", "PSEN1", "PSEN2"},
        {"APOE", "PSEN1"},
        {"APOE", "PSEN2"},
        {"PSEN1", "PSEN2"},
    };
    AblationTable table;
    table.task = task;
    table.seeds = seeds;
    for (const auto& subset : subsets) {
        for (WeightMode mode : {WeightMode::Learned, WeightMode::Unit}) {
            AblationRow row;
            row.mode = mode;
            row.gene_subset = subset;
            table.rows.push_back(std::move(row));
        }
    }

    if (jobs <= 1) {
        for (auto& row : table.rows) {
            row.report =
                run_experiment(genes, images, task, row.mode, row.gene_subset, seeds, config);
        }
        return table;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= table.rows.size()) break;
            auto& row = table.rows[i];
            row.report =
                run_experiment(genes, images, task, row.mode, row.gene_subset, seeds, config);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < std::min(jobs, table.rows.size()); ++i)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return table;
}

// --- serialization ---------------------------------------------------------------

namespace {

json config_to_json(const RunConfig& c) {
    json j;
    j["epochs_ae"] = c.epochs_ae;
    j["lr_ae"] = c.lr_ae;
    j["ae_channels"] = {c.ae_channels1, c.ae_channels2, c.ae_channels3};
    j["ae_kernel"] = c.ae_kernel;
    j["ae_pool"] = c.ae_pool;
    j["latent_dim"] = c.latent_dim;
    j["epochs_gnn"] = c.epochs_gnn;
    j["lr_gnn"] = c.lr_gnn;
    j["a_dim"] = c.a_dim;
    j["d_h"] = c.d_h;
    j["include_self"] = c.include_self;
    j["train_alpha"] = c.train_alpha;
    j["slice_k"] = c.slice_k;
    j["train_fraction"] = c.train_fraction;
    j["task"] = c.task;
    j["mode"] = c.mode;
    j["genes"] = c.genes;
    j["seeds"] = c.seeds;
    j["jobs"] = c.jobs;
    j["gene_csv"] = c.gene_csv;
    j["features_csv"] = c.features_csv;
    j["volumes_dir"] = c.volumes_dir;
    j["volumes_out_dir"] = c.volumes_out_dir;
    j["ae_checkpoint"] = c.ae_checkpoint;
    j["gnn_checkpoint"] = c.gnn_checkpoint;
    j["partition_csv"] = c.partition_csv;
    j["report_json"] = c.report_json;
    j["report_txt"] = c.report_txt;
    j["ablation_json"] = c.ablation_json;
    j["ablation_txt"] = c.ablation_txt;
    return j;
}

json metricset_to_json(const MetricSet& m, const Task& task) {
    json j;
    j["accuracy"] = m.accuracy;
    json per_class = json::array();
    for (std::size_t c = 0; c < m.per_class.size(); ++c) {
        const auto& pc = m.per_class[c];
        json cj;
        cj["class"] = task.class_name(static_cast<int>(c));
        cj["precision"] = pc.precision;
        cj["recall"] = pc.recall;
        cj["f1"] = pc.f1;
        cj["support"] = pc.support;
        json undefined = json::array();
        if (!pc.precision_defined) undefined.push_back("precision");
        if (!pc.recall_defined) undefined.push_back("recall");
        if (!pc.f1_defined) undefined.push_back("f1");
        cj["undefined"] = undefined;
        per_class.push_back(cj);
    }
    j["per_class"] = per_class;
    j["positive_class"] = task.class_name(m.positive_class);
    j["f1"] = m.positive().f1;
    j["recall"] = m.positive().recall;
    j["precision"] = m.positive().precision;
    j["macro_f1"] = m.macro_f1;
    j["weighted_f1"] = m.weighted_f1;
    return j;
}

json seed_result_to_json(const SeedResult& r, const Task& task) {
    json j;
    j["seed"] = r.seed;
    j["n_train"] = r.n_train;
    j["n_test"] = r.n_test;
    j["final_train_loss"] = r.final_train_loss;
    json cm = json::array();
    for (int t = 0; t < r.cm.n_classes; ++t) {
        json row = json::array();
        for (int p = 0; p < r.cm.n_classes; ++p) row.push_back(r.cm.at(t, p));
        cm.push_back(row);
    }
    j["confusion"] = cm;
    j["metrics"] = metricset_to_json(r.metric_set, task);
    json weights = json::array();
    for (std::size_t c = 0; c < r.weights_per_class.size(); ++c) {
        json wj;
        wj["class"] = task.class_name(static_cast<int>(c));
        if (r.weights_per_class[c].has_value()) {
            const auto& w = *r.weights_per_class[c];
            wj["n_records"] = w.n_records;
            wj["eq_as_written"] = w.as_written;
            wj["per_sample_mean"] = w.per_sample_mean;
        } else {
            wj["n_records"] = 0;
        }
        weights.push_back(wj);
    }
    j["edge_weights"] = weights;
    return j;
}

json stat_to_json(const AggregateStat& s) {
    json j;
    j["mean"] = s.mean;
    j["sd"] = s.sd;
    return j;
}

json report_body(const EvaluationReport& r) {
    json j;
    j["task"] = r.task.name();
    j["mode"] = weight_mode_name(r.mode);
    j["gene_subset"] = r.gene_subset;
    j["seeds"] = r.seeds;
    json per_seed = json::array();
    for (const auto& s : r.per_seed) per_seed.push_back(seed_result_to_json(s, r.task));
    j["per_seed"] = per_seed;
    json agg;
    agg["accuracy"] = stat_to_json(r.accuracy);
    agg["f1"] = stat_to_json(r.f1_positive);
    agg["recall"] = stat_to_json(r.recall_positive);
    agg["precision"] = stat_to_json(r.precision_positive);
    agg["macro_f1"] = stat_to_json(r.macro_f1);
    agg["weighted_f1"] = stat_to_json(r.weighted_f1);
    j["aggregate"] = agg;
    return j;
}

std::string join_genes(const std::vector<std::string>& subset) {
    std::string out;
    for (const auto& g : resolve_gene_subset(subset)) {
        if (!out.empty()) out += "+";
        out += g.name;
    }
    return out;
}

void append_metric_row(std::ostringstream& os, const std::string& mode, const std::string& genes,
                       const EvaluationReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-8s %-18s %8.4f %8.4f %9.4f %9.4f %8.4f %9.4f\n",
                  mode.c_str(), genes.c_str(), r.f1_positive.mean, r.recall_positive.mean,
                  r.precision_positive.mean, r.accuracy.mean, r.macro_f1.mean,
                  r.weighted_f1.mean);
    os << buf;
}

const char* kTableHeader =
    "weights  genes                    F1   recall precision  accuracy    macro  weighted\n";

} // namespace

std::string report_to_json(const EvaluationReport& report) {
    json j = report_body(report);
    j["config"] = config_to_json(report.config);
    return j.dump(2) + "\n";
}

std::string report_to_text(const EvaluationReport& report) {
    std::ostringstream os;
    os << "task " << report.task.name() << "  positive class "
       << report.task.class_name(report.task.positive_class()) << "  seeds";
    for (auto s : report.seeds) os << " " << s;
    os << "\n\n" << kTableHeader;
    append_metric_row(os, weight_mode_name(report.mode), join_genes(report.gene_subset), report);
    os << "\nper seed:\n";
    for (const auto& r : report.per_seed) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "  seed %-4llu accuracy %.4f  f1 %.4f  n_train %zu  n_test %zu\n",
                      static_cast<unsigned long long>(r.seed), r.metric_set.accuracy,
                      r.metric_set.positive().f1, r.n_train, r.n_test);
        os << buf;
    }
    os << "\naveraged edge weights (per-sample mean | as-written):\n";
    for (const auto& r : report.per_seed) {
        for (std::size_t c = 0; c < r.weights_per_class.size(); ++c) {
            if (!r.weights_per_class[c].has_value()) continue;
            const auto& w = *r.weights_per_class[c];
            os << "  seed " << r.seed << " class " << report.task.class_name(static_cast<int>(c))
               << " (n=" << w.n_records << "):";
            for (const auto& [gene, v] : w.per_sample_mean) {
                char buf[96];
                std::snprintf(buf, sizeof(buf), " %s %.4f|%.4f", gene.c_str(), v,
                              w.as_written.at(gene));
                os << buf;
            }
            os << "\n";
        }
    }
    return os.str();
}

std::string ablation_to_json(const AblationTable& table) {
    json j;
    j["task"] = table.task.name();
    j["seeds"] = table.seeds;
    json rows = json::array();
    for (const auto& row : table.rows) {
        json rj = report_body(row.report);
        rows.push_back(rj);
    }
    j["rows"] = rows;
    if (!table.rows.empty()) j["config"] = config_to_json(table.rows.front().report.config);
    return j.dump(2) + "\n";
}

std::string ablation_to_text(const AblationTable& table) {
    std::ostringstream os;
    os << "ablation  task " << table.task.name() << "  seeds";
    for (auto s : table.seeds) os << " " << s;
    os << "  (mean over seeds)\n\n" << kTableHeader;
    for (const auto& row : table.rows) {
        append_metric_row(os, weight_mode_name(row.mode), join_genes(row.gene_subset),
                          row.report);
    }
    return os.str();
}

} // namespace bgrl
