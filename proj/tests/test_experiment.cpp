#include "doctest.h"

#include "bgrl/errors.hpp"
#include "bgrl/experiment.hpp"

#include <cmath>

using namespace bgrl;

namespace {

RunConfig fast_config(std::size_t epochs = 60) {
    RunConfig cfg;
    cfg.epochs_gnn = epochs;
    return cfg;
}

} // namespace

TEST_CASE("unit mode reports every edge weight as exactly 1") {
    auto data = generate_synthetic(24, 3, 1.0, {"PSEN1"});
    auto report = run_experiment(data.genes, data.images, Task::from_name("ad_vs_cn"),
                                 WeightMode::Unit, {"APOE", "PSEN1", "PSEN2"}, {1, 2},
                                 fast_config());
    REQUIRE(report.per_seed.size() == 2);
    for (const auto& seed_result : report.per_seed) {
        for (const auto& w : seed_result.weights_per_class) {
            REQUIRE(w.has_value());
            for (const auto& [gene, v] : w->per_sample_mean) CHECK(v == 1.0);
        }
    }
}

TEST_CASE("reports are pure functions of data, config, and seeds") {
    auto data = generate_synthetic(24, 9, 1.0, {"PSEN2"});
    Task task = Task::from_name("ad_vs_cn");
    RunConfig cfg = fast_config();
    auto a = run_experiment(data.genes, data.images, task, WeightMode::Learned,
                            {"APOE", "PSEN1", "PSEN2"}, {4, 5}, cfg);
    auto b = run_experiment(data.genes, data.images, task, WeightMode::Learned,
                            {"APOE", "PSEN1", "PSEN2"}, {4, 5}, cfg);
    CHECK(report_to_json(a) == report_to_json(b));
}

TEST_CASE("learned mode separates planted synthetic data across seeds") {
    auto data = generate_synthetic(64, 21, 2.0, {"PSEN1", "PSEN2"});
    RunConfig cfg; // paper defaults: 800 epochs, lr 9e-3
    auto report = run_experiment(data.genes, data.images, Task::from_name("ad_vs_cn"),
                                 WeightMode::Learned, {"APOE", "PSEN1", "PSEN2"},
                                 {1, 2, 3, 4, 5}, cfg);
    REQUIRE(report.per_seed.size() == 5);
    CHECK(report.accuracy.mean >= 0.85);
    for (const auto& r : report.per_seed) {
        CHECK(r.n_train + r.n_test == 64);
        CHECK(r.n_test == 13); // round(0.2 * 64)
    }
}

TEST_CASE("report json embeds the effective config and aggregate stats") {
    auto data = generate_synthetic(16, 2, 1.0, {"APOE"});
    auto report = run_experiment(data.genes, data.images, Task::from_name("ad_vs_cn"),
                                 WeightMode::Learned, {"APOE", "PSEN1"}, {11}, fast_config(20));
    std::string js = report_to_json(report);
    CHECK(js.find("\"lr_gnn\": 0.009") != std::string::npos);
    CHECK(js.find("\"task\": \"ad_vs_cn\"") != std::string::npos);
    CHECK(js.find("\"gene_subset\"") != std::string::npos);
    CHECK(js.find("\"aggregate\"") != std::string::npos);
    CHECK(js.find("\"sd\"") != std::string::npos);
    // single seed: sd must be zero
    CHECK(report.accuracy.sd == 0.0);
    std::string txt = report_to_text(report);
    CHECK(txt.find("APOE+PSEN1") != std::string::npos);
}

TEST_CASE("ablation suite runs the 2x4 grid and tags every row") {
    auto data = generate_synthetic(24, 31, 1.0, {"PSEN1", "PSEN2"});
    RunConfig cfg = fast_config(15);
    auto table = ablation_suite(data.genes, data.images, Task::from_name("ad_vs_cn"), {1, 2},
                                cfg, 1);
    REQUIRE(table.rows.size() == 8);
    int learned = 0, unit = 0, full = 0;
    for (const auto& row : table.rows) {
        (row.mode == WeightMode::Learned ? learned : unit)++;
        if (row.gene_subset.size() == 3) ++full;
        CHECK(row.report.accuracy.mean >= 0.0);
        CHECK(row.report.accuracy.mean <= 1.0);
        CHECK(row.report.f1_positive.mean >= 0.0);
        CHECK(row.report.f1_positive.mean <= 1.0);
        CHECK(row.report.macro_f1.mean <= 1.0);
        CHECK(row.report.weighted_f1.mean <= 1.0);
    }
    CHECK(learned == 4);
    CHECK(unit == 4);
    CHECK(full == 2);

    std::string txt = ablation_to_text(table);
    CHECK(txt.find("learned") != std::string::npos);
    CHECK(txt.find("unit") != std::string::npos);
    CHECK(txt.find("APOE+PSEN1+PSEN2") != std::string::npos);
    CHECK(txt.find("PSEN1+PSEN2") != std::string::npos);
}

TEST_CASE("parallel ablation produces the same table as sequential") {
    auto data = generate_synthetic(16, 41, 1.0, {"PSEN1"});
    RunConfig cfg = fast_config(10);
    Task task = Task::from_name("ad_vs_cn");
    auto seq = ablation_suite(data.genes, data.images, task, {1}, cfg, 1);
    auto par = ablation_suite(data.genes, data.images, task, {1}, cfg, 2);
    CHECK(ablation_to_json(seq) == ablation_to_json(par));
}

TEST_CASE("carrier-pair subset beats the mixed pair in most seeds") {
    // mirrors the expected ablation direction: only PSEN1 and PSEN2 carry
    // signal, so {PSEN1,PSEN2} should not lose to {APOE,PSEN1}
    auto data = generate_synthetic(64, 51, 1.0, {"PSEN1", "PSEN2"});
    RunConfig cfg; // default 800-epoch schedule
    Task task = Task::from_name("ad_vs_cn");
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    auto carriers = run_experiment(data.genes, data.images, task, WeightMode::Learned,
                                   {"PSEN1", "PSEN2"}, seeds, cfg);
    auto mixed = run_experiment(data.genes, data.images, task, WeightMode::Learned,
                                {"APOE", "PSEN1"}, seeds, cfg);
    int wins = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (carriers.per_seed[i].metric_set.accuracy >= mixed.per_seed[i].metric_set.accuracy)
            ++wins;
    }
    CHECK(wins >= 3);
}

TEST_CASE("three-way task produces a 3x3 confusion matrix and per-class blocks") {
    auto binary = generate_synthetic(36, 61, 1.5, {"PSEN1", "PSEN2"});
    // hand the middle third MCI labels to exercise the 3-way path
    GeneExpressionTable genes = binary.genes;
    FeatureMatrix images = binary.images;
    for (std::size_t i = 0; i < genes.rows.size(); ++i) {
        if (i % 3 == 2) {
            genes.rows[i].label = Cls::MCI;
            images.rows[i].label = Cls::MCI;
        }
    }
    auto report = run_experiment(genes, images, Task::from_name("three_way"),
                                 WeightMode::Learned, {"APOE", "PSEN1", "PSEN2"}, {3},
                                 fast_config(25));
    REQUIRE(report.per_seed.size() == 1);
    CHECK(report.per_seed[0].cm.n_classes == 3);
    CHECK(report.per_seed[0].metric_set.per_class.size() == 3);
    CHECK(report.per_seed[0].weights_per_class.size() == 3);
}
