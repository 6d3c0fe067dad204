#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bgrl {

// Every tunable of the pipeline with its default. Loaded from a line-based
// `key = value` file (# comments); unknown keys and out-of-range values are
// rejected with the offending key and line. The full effective config is
// echoed into every report.
struct RunConfig {
    // autoencoder
    std::size_t epochs_ae = 100;
    double lr_ae = 9e-4;
    std::size_t ae_channels1 = 8, ae_channels2 = 16, ae_channels3 = 32;
    std::size_t ae_kernel = 3;
    std::size_t ae_pool = 2;
    std::size_t latent_dim = 512;

    // gnn
    std::size_t epochs_gnn = 800;
    double lr_gnn = 9e-3;
    std::size_t a_dim = 16;
    std::size_t d_h = 64;
    bool include_self = true;
    bool train_alpha = false;

    // data
    std::size_t slice_k = 64;
    double train_fraction = 0.8;
    std::string task = "ad_vs_cn";
    std::string mode = "learned"; // learned | unit
    std::vector<std::string> genes = {"apoe", "psen1", "psen2"};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::size_t jobs = 1;

    // paths
    std::string gene_csv = "genes.csv";
    std::string features_csv = "features.csv";
    std::string volumes_dir = "volumes";
    std::string volumes_out_dir = "volumes_preprocessed";
    std::string ae_checkpoint = "autoencoder.bgnn";
    std::string gnn_checkpoint = "model.bgnn";
    std::string partition_csv = "partition.csv";
    std::string report_json = "report.json";
    std::string report_txt = "report.txt";
    std::string ablation_json = "ablation.json";
    std::string ablation_txt = "ablation.txt";
};

RunConfig load_config(const std::string& path);

// Parses the key=value body (used by load_config; exposed for tests).
RunConfig parse_config_text(const std::string& text, const std::string& origin);

} // namespace bgrl
