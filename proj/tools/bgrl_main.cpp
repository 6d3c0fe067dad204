// bgrl: radiogenomic bipartite graph representation learning pipeline.
//
// Stages: synth | preprocess | train-ae | extract | train-gnn | eval |
// ablate | report-weights. Each stage reads the previous stage's artifacts
// and overwrites its own outputs; identical inputs and seeds give
// byte-identical outputs. Exit codes: 0 success, 1 contract/config error,
// 2 I/O error.

#include "bgrl/autoencoder.hpp"
#include "bgrl/bgnn.hpp"
#include "bgrl/config.hpp"
#include "bgrl/dataset.hpp"
#include "bgrl/errors.hpp"
#include "bgrl/experiment.hpp"
#include "bgrl/io.hpp"
#include "bgrl/model_io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_set>

namespace fs = std::filesystem;
using namespace bgrl;

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

std::uint64_t pick_seed(const RunConfig& cfg, std::int64_t override_seed) {
    if (override_seed >= 0) return static_cast<std::uint64_t>(override_seed);
    return cfg.seeds.front();
}

std::vector<VolumeSample> filter_task(std::vector<VolumeSample> samples, const Task& task) {
    std::vector<VolumeSample> out;
    for (auto& s : samples)
        if (task.includes(s.label)) out.push_back(std::move(s));
    return out;
}

int cmd_synth(std::size_t n, std::uint64_t seed, double signal, const std::string& carriers,
              const std::string& out_dir) {
    std::vector<std::string> carrier_list;
    std::stringstream ss(carriers);
    std::string item;
    while (std::getline(ss, item, ',')) carrier_list.push_back(item);
    auto data = generate_synthetic(n, seed, signal, carrier_list);
    fs::create_directories(out_dir);
    write_gene_csv((fs::path(out_dir) / "genes.csv").string(), data.genes);
    write_features_csv((fs::path(out_dir) / "features.csv").string(), data.images);
    write_labels_csv((fs::path(out_dir) / "labels.csv").string(), data.truth);
    std::size_t cn = 0, ad = 0;
    for (const auto& [id, cls] : data.truth) (cls == Cls::CN ? cn : ad)++;
    std::printf("synth: %zu samples (%zu CN, %zu AD), signal %g, carriers %s -> %s\n",
                data.truth.size(), cn, ad, signal, carriers.c_str(), out_dir.c_str());
    return 0;
}

int cmd_preprocess(const RunConfig& cfg) {
    auto samples = read_volume_dir(cfg.volumes_dir);
    std::vector<VolumeSample> out;
    out.reserve(samples.size());
    for (auto& s : samples) {
        out.push_back({s.sample_id, slice_rank_select(s.volume, cfg.slice_k), s.label});
    }
    write_volume_dir(cfg.volumes_out_dir, out);
    std::printf("preprocess: %zu volumes -> %zu slices each -> %s\n", out.size(), cfg.slice_k,
                cfg.volumes_out_dir.c_str());
    return 0;
}

AutoencoderConfig ae_config_for(const RunConfig& cfg, const Tensor& volume) {
    AutoencoderConfig ae;
    ae.depth = volume.dim(0);
    ae.height = volume.dim(1);
    ae.width = volume.dim(2);
    ae.channels = {cfg.ae_channels1, cfg.ae_channels2, cfg.ae_channels3};
    ae.kernel = cfg.ae_kernel;
    ae.pool = cfg.ae_pool;
    ae.latent_dim = cfg.latent_dim;
    return ae;
}

int cmd_train_ae(const RunConfig& cfg, std::int64_t override_seed) {
    const std::uint64_t seed = pick_seed(cfg, override_seed);
    const Task task = Task::from_name(cfg.task);
    auto samples = filter_task(read_volume_dir(cfg.volumes_out_dir), task);
    if (samples.empty()) throw EmptyDatasetError("train-ae: no volumes for task " + cfg.task);
    for (const auto& s : samples) {
        if (s.volume.shape() != samples.front().volume.shape()) {
            throw DimensionError("train-ae: volume " + s.sample_id + " has shape " +
                                 shape_str(s.volume.shape()) + ", expected " +
                                 shape_str(samples.front().volume.shape()));
        }
    }

    std::vector<std::pair<std::string, Cls>> items;
    for (const auto& s : samples) items.emplace_back(s.sample_id, s.label);
    DatasetPartition part = split_ids(items, seed, task, cfg.train_fraction);
    write_partition_csv(cfg.partition_csv, part);

    std::vector<VolumeSample> train;
    std::unordered_set<std::string> train_ids(part.train_ids.begin(), part.train_ids.end());
    for (const auto& s : samples)
        if (train_ids.count(s.sample_id)) train.push_back(s);

    AutoencoderConfig ae = ae_config_for(cfg, samples.front().volume);
    AutoencoderModel model = init_autoencoder(ae, seed);
    AeTrainOptions opts;
    opts.epochs = cfg.epochs_ae;
    opts.lr = cfg.lr_ae;
    opts.seed = seed;
    auto result = train_autoencoder(train, model, opts);
    save_autoencoder_checkpoint(cfg.ae_checkpoint, model);
    std::printf("train-ae: %zu train volumes, %zu epochs, loss %.6f -> %.6f, checkpoint %s\n",
                train.size(), cfg.epochs_ae, result.loss_trace.front(),
                result.loss_trace.back(), cfg.ae_checkpoint.c_str());
    return 0;
}

int cmd_extract(const RunConfig& cfg) {
    auto samples = read_volume_dir(cfg.volumes_out_dir);
    AutoencoderModel model = load_autoencoder_checkpoint(cfg.ae_checkpoint);
    auto features = extract_features(model, samples);
    write_features_csv(cfg.features_csv, features);
    std::printf("extract: %zu samples x %zu features -> %s\n", features.rows.size(),
                features.rows.front().values.size(), cfg.features_csv.c_str());
    return 0;
}

int cmd_train_gnn(const RunConfig& cfg, std::int64_t override_seed) {
    const std::uint64_t seed = pick_seed(cfg, override_seed);
    const Task task = Task::from_name(cfg.task);
    const WeightMode mode = weight_mode_from_name(cfg.mode);
    auto genes = load_gene_csv(cfg.gene_csv);
    auto features = read_features_csv(cfg.features_csv);

    std::unordered_set<std::string> image_ids;
    for (const auto& r : features.rows) image_ids.insert(r.sample_id);
    std::vector<std::pair<std::string, Cls>> items;
    for (const auto& row : genes.rows)
        if (image_ids.count(row.sample_id)) items.emplace_back(row.sample_id, row.label);
    if (items.empty()) throw EmptyDatasetError("train-gnn: no sample ids common to both tables");

    DatasetPartition part = split_ids(items, seed, task, cfg.train_fraction);
    write_partition_csv(cfg.partition_csv, part);

    GeneNormStats stats = fit_min_max(genes, part.train_ids);
    auto norm = apply_min_max(genes, stats);
    auto built = build_subgraphs(norm, features, cfg.genes);

    std::vector<BipartiteSubgraph> train;
    std::vector<int> targets;
    std::unordered_set<std::string> train_ids(part.train_ids.begin(), part.train_ids.end());
    for (const auto& sg : built.subgraphs) {
        if (!train_ids.count(sg.sample_id)) continue;
        train.push_back(sg);
        targets.push_back(task.target_of(sg.label));
    }

    BgnnConfig bgnn_cfg;
    bgnn_cfg.genes = resolve_gene_subset(cfg.genes);
    bgnn_cfg.image_dim = features.rows.front().values.size();
    bgnn_cfg.a_dim = cfg.a_dim;
    bgnn_cfg.d_h = cfg.d_h;
    bgnn_cfg.n_classes = task.n_classes();
    bgnn_cfg.include_self = cfg.include_self;
    bgnn_cfg.train_alpha = cfg.train_alpha;
    bgnn_cfg.mode = mode;
    BgnnModel model = init_model(bgnn_cfg, seed);

    GnnTrainOptions opts;
    opts.epochs = cfg.epochs_gnn;
    opts.lr = cfg.lr_gnn;
    auto result = train_gnn(train, targets, model, opts);
    save_bgnn_checkpoint(cfg.gnn_checkpoint, model, task, seed);
    std::printf("train-gnn: %zu train subgraphs, %zu epochs, mode %s, loss %.6f -> %.6f, "
                "checkpoint %s\n",
                train.size(), cfg.epochs_gnn, weight_mode_name(mode).c_str(),
                result.loss_trace.front(), result.loss_trace.back(),
                cfg.gnn_checkpoint.c_str());
    return 0;
}

EvaluationReport single_seed_report(const RunConfig& cfg) {
    auto genes = load_gene_csv(cfg.gene_csv);
    auto features = read_features_csv(cfg.features_csv);
    LoadedBgnn loaded = load_bgnn_checkpoint(cfg.gnn_checkpoint);
    std::vector<std::string> train_ids, test_ids;
    read_partition_csv(cfg.partition_csv, train_ids, test_ids);

    std::vector<std::string> subset;
    for (const auto& spec : loaded.model.config.genes) subset.push_back(spec.name);

    EvaluationReport report;
    report.task = loaded.task;
    report.mode = loaded.model.config.mode;
    report.gene_subset = subset;
    report.seeds = {loaded.seed};
    report.config = cfg;
    report.per_seed.push_back(evaluate_trained(genes, features, loaded.model, loaded.task,
                                               subset, train_ids, test_ids, loaded.seed));
    const auto& m = report.per_seed[0].metric_set;
    report.accuracy = {m.accuracy, 0.0};
    report.f1_positive = {m.positive().f1, 0.0};
    report.recall_positive = {m.positive().recall, 0.0};
    report.precision_positive = {m.positive().precision, 0.0};
    report.macro_f1 = {m.macro_f1, 0.0};
    report.weighted_f1 = {m.weighted_f1, 0.0};
    return report;
}

int cmd_eval(const RunConfig& cfg) {
    EvaluationReport report = single_seed_report(cfg);
    write_text_file(cfg.report_json, report_to_json(report));
    write_text_file(cfg.report_txt, report_to_text(report));
    std::printf("eval: accuracy %.4f f1 %.4f (%zu test samples) -> %s\n",
                report.accuracy.mean, report.f1_positive.mean, report.per_seed[0].n_test,
                cfg.report_json.c_str());
    return 0;
}

int cmd_report_weights(const RunConfig& cfg, const std::string& out_path) {
    EvaluationReport report = single_seed_report(cfg);
    const SeedResult& r = report.per_seed[0];
    std::string json = "{\n  \"task\": \"" + report.task.name() + "\",\n  \"classes\": [\n";
    std::ostringstream body;
    for (std::size_t c = 0; c < r.weights_per_class.size(); ++c) {
        if (c) body << ",\n";
        body << "    {\"class\": \"" << report.task.class_name(static_cast<int>(c)) << "\"";
        if (r.weights_per_class[c].has_value()) {
            const auto& w = *r.weights_per_class[c];
            body << ", \"n_records\": " << w.n_records << ", \"per_sample_mean\": {";
            bool first = true;
            for (const auto& [gene, v] : w.per_sample_mean) {
                if (!first) body << ", ";
                first = false;
                char buf[64];
                std::snprintf(buf, sizeof(buf), "\"%s\": %.17g", gene.c_str(), v);
                body << buf;
            }
            body << "}, \"as_written\": {";
            first = true;
            for (const auto& [gene, v] : w.as_written) {
                if (!first) body << ", ";
                first = false;
                char buf[64];
                std::snprintf(buf, sizeof(buf), "\"%s\": %.17g", gene.c_str(), v);
                body << buf;
            }
            body << "}}";
        } else {
            body << ", \"n_records\": 0}";
        }
    }
    json += body.str() + "\n  ]\n}\n";
    write_text_file(out_path, json);
    std::printf("report-weights: %s\n%s", out_path.c_str(), report_to_text(report).c_str());
    return 0;
}

int cmd_ablate(const RunConfig& cfg, const std::string& seeds_flag, std::int64_t jobs_flag) {
    RunConfig run_cfg = cfg;
    if (!seeds_flag.empty()) {
        run_cfg.seeds.clear();
        std::stringstream ss(seeds_flag);
        std::string item;
        while (std::getline(ss, item, ',')) {
            run_cfg.seeds.push_back(std::stoull(item));
        }
        if (run_cfg.seeds.empty()) throw ConfigError("ablate: empty --seeds list");
    }
    const std::size_t jobs = jobs_flag > 0 ? static_cast<std::size_t>(jobs_flag) : cfg.jobs;
    const Task task = Task::from_name(run_cfg.task);
    auto genes = load_gene_csv(run_cfg.gene_csv);
    auto features = read_features_csv(run_cfg.features_csv);
    auto table = ablation_suite(genes, features, task, run_cfg.seeds, run_cfg, jobs);
    write_text_file(run_cfg.ablation_json, ablation_to_json(table));
    std::string txt = ablation_to_text(table);
    write_text_file(run_cfg.ablation_txt, txt);
    std::printf("%s", txt.c_str());
    std::printf("ablate: %zu rows -> %s, %s\n", table.rows.size(), run_cfg.ablation_json.c_str(),
                run_cfg.ablation_txt.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"radiogenomic bipartite graph representation learning pipeline"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic radiogenomic dataset");
    std::size_t synth_n = 120;
    std::uint64_t synth_seed = 1;
    double synth_signal = 1.0;
    std::string synth_carriers = "psen1,psen2";
    std::string synth_out = ".";
    synth->add_option("--n", synth_n, "sample count (even, >= 8)");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--signal", synth_signal, "planted signal strength");
    synth->add_option("--carriers", synth_carriers, "comma list of signal-carrying genes");
    synth->add_option("--out", synth_out, "output directory");

    // pipeline stages share --config and --seed
    std::string config_path;
    std::int64_t seed_override = -1;
    std::string mode_override;
    std::string seeds_flag;
    std::int64_t jobs_flag = 0;
    std::string weights_out = "weights.json";

    auto add_config = [&](CLI::App* cmd, bool with_seed = false) {
        cmd->add_option("--config", config_path, "run configuration file")->required();
        if (with_seed) cmd->add_option("--seed", seed_override, "override the config seed");
    };

    auto* preprocess = app.add_subcommand("preprocess", "entropy-rank and keep top slices");
    add_config(preprocess);
    auto* train_ae = app.add_subcommand("train-ae", "train the denoising autoencoder");
    add_config(train_ae, true);
    auto* extract = app.add_subcommand("extract", "extract latent image features");
    add_config(extract);
    auto* train_gnn_cmd = app.add_subcommand("train-gnn", "train the bipartite GNN");
    add_config(train_gnn_cmd, true);
    train_gnn_cmd->add_option("--mode", mode_override, "learned | unit (overrides config)");
    auto* eval = app.add_subcommand("eval", "evaluate the trained GNN on its test split");
    add_config(eval);
    auto* ablate = app.add_subcommand("ablate", "run the weights x gene-subset ablation grid");
    add_config(ablate);
    ablate->add_option("--seeds", seeds_flag, "comma list of seeds (overrides config)");
    ablate->add_option("--jobs", jobs_flag, "parallel grid cells");
    auto* report_weights = app.add_subcommand("report-weights", "averaged edge weights per class");
    add_config(report_weights);
    report_weights->add_option("--out", weights_out, "output JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            return cmd_synth(synth_n, synth_seed, synth_signal, synth_carriers, synth_out);
        }
        RunConfig cfg = load_config(config_path);
        if (!mode_override.empty()) cfg.mode = mode_override;
        if (preprocess->parsed()) return cmd_preprocess(cfg);
        if (train_ae->parsed()) return cmd_train_ae(cfg, seed_override);
        if (extract->parsed()) return cmd_extract(cfg);
        if (train_gnn_cmd->parsed()) return cmd_train_gnn(cfg, seed_override);
        if (eval->parsed()) return cmd_eval(cfg);
        if (ablate->parsed()) return cmd_ablate(cfg, seeds_flag, jobs_flag);
        if (report_weights->parsed()) return cmd_report_weights(cfg, weights_out);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
