#include "doctest.h"

#include "bgrl/dataset.hpp"
#include "bgrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

using namespace bgrl;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        static int counter = 0;
        path = "test_genes_" + std::to_string(counter++) + ".csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

const char* kHeader =
    "sample_id,label,apoe_1,psen1_1,psen1_2,psen1_3,psen1_4,psen2_1,psen2_2,psen2_3,psen2_4\n";

std::string make_rows(std::size_t n) {
    std::string s = kHeader;
    for (std::size_t i = 0; i < n; ++i) {
        const char* label = i % 3 == 0 ? "CN" : (i % 3 == 1 ? "MCI" : "AD");
        s += "s" + std::to_string(i) + "," + label;
        for (int j = 0; j < 9; ++j) s += "," + std::to_string(0.1 * (double)(i + j));
        s += "\n";
    }
    return s;
}

FeatureMatrix tiny_features(const std::vector<std::string>& ids, std::size_t dim = 6) {
    FeatureMatrix fm;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        FeatureRow r;
        r.sample_id = ids[i];
        r.label = Cls::CN;
        for (std::size_t j = 0; j < dim; ++j) r.values.push_back(0.01 * (double)(i + j));
        fm.rows.push_back(r);
    }
    return fm;
}

} // namespace

TEST_CASE("load_gene_csv parses a well-formed 52-row file") {
    TempCsv csv(make_rows(52));
    auto table = load_gene_csv(csv.path);
    CHECK(table.rows.size() == 52);
    CHECK(table.excluded_ids.empty());
    CHECK(table.rows[0].apoe.size() == 1);
    CHECK(table.rows[0].psen1.size() == 4);
    CHECK(table.rows[0].psen2.size() == 4);
}

TEST_CASE("load_gene_csv drops rows with missing gene values and logs them") {
    std::string content = kHeader;
    content += "a,CN,0.1,1,2,3,4,5,6,7,8\n";
    content += "b,AD,0.2,1,,3,4,5,6,7,8\n"; // empty psen1_2 cell
    content += "c,MCI,0.3,1,2,3,4,5,6,7,8\n";
    TempCsv csv(content);
    auto table = load_gene_csv(csv.path);
    CHECK(table.rows.size() == 2);
    REQUIRE(table.excluded_ids.size() == 1);
    CHECK(table.excluded_ids[0] == "b");
}

TEST_CASE("load_gene_csv reports the line of a malformed row") {
    std::string content = kHeader;
    content += "a,CN,0.1,1,2,3,4,5,6,7,8\n";
    content += "b,AD,0.2,1,2\n"; // wrong column count, line 3
    TempCsv csv(content);
    CHECK_THROWS_WITH_AS(load_gene_csv(csv.path), doctest::Contains(":3:"), ParseError);
}

TEST_CASE("load_gene_csv rejects a bad header and non-numeric cells") {
    TempCsv bad_header("id,label,apoe\n");
    CHECK_THROWS_AS(load_gene_csv(bad_header.path), ParseError);

    std::string content = kHeader;
    content += "a,CN,zap,1,2,3,4,5,6,7,8\n";
    TempCsv bad_cell(content);
    CHECK_THROWS_WITH_AS(load_gene_csv(bad_cell.path), doctest::Contains("zap"), ParseError);
}

TEST_CASE("load_gene_csv with zero usable rows is an empty-dataset error") {
    std::string content = kHeader;
    content += "a,CN,,1,2,3,4,5,6,7,8\n";
    TempCsv csv(content);
    CHECK_THROWS_AS(load_gene_csv(csv.path), EmptyDatasetError);
}

TEST_CASE("min-max normalization maps train columns to [0,1]") {
    GeneExpressionTable t;
    for (int i = 0; i < 3; ++i) {
        GeneRow r;
        r.sample_id = "s" + std::to_string(i);
        r.label = Cls::CN;
        r.apoe = {5.0 * i};           // column [0,5,10]
        r.psen1 = {7, 7, 7, 7};       // constant columns
        r.psen2 = {1.0 * i, 0, 0, 0};
        t.rows.push_back(r);
    }
    auto stats = fit_min_max(t, {"s0", "s1", "s2"});
    auto out = apply_min_max(t, stats);
    CHECK(out.rows[0].apoe[0] == 0.0);
    CHECK(out.rows[1].apoe[0] == doctest::Approx(0.5));
    CHECK(out.rows[2].apoe[0] == 1.0);
    for (int i = 0; i < 3; ++i) CHECK(out.rows[i].psen1[0] == 0.0); // degenerate rule
}

TEST_CASE("test values above the train max exceed 1 (no clipping)") {
    GeneExpressionTable t;
    for (int i = 0; i < 3; ++i) {
        GeneRow r;
        r.sample_id = "s" + std::to_string(i);
        r.label = Cls::CN;
        r.apoe = {static_cast<double>(i)}; // train range [0,1] over s0,s1
        r.psen1 = {0, 0, 0, 0};
        r.psen2 = {0, 0, 0, 0};
        t.rows.push_back(r);
    }
    auto stats = fit_min_max(t, {"s0", "s1"}); // s2 (value 2) is "test"
    auto out = apply_min_max(t, stats);
    CHECK(out.rows[2].apoe[0] == doctest::Approx(2.0));
}

TEST_CASE("normalization stats are a pure function of the train partition") {
    GeneExpressionTable t;
    for (int i = 0; i < 10; ++i) {
        GeneRow r;
        r.sample_id = "s" + std::to_string(i);
        r.label = i % 2 ? Cls::AD : Cls::CN;
        r.apoe = {0.37 * i};
        r.psen1 = {0.11 * i, 1, 2, 3};
        r.psen2 = {0, 1, 2, 0.05 * i};
        t.rows.push_back(r);
    }
    std::vector<std::pair<std::string, Cls>> items;
    for (const auto& r : t.rows) items.emplace_back(r.sample_id, r.label);
    Task task = Task::from_name("ad_vs_cn");
    auto p1 = split_ids(items, 5, task);
    auto p1b = split_ids(items, 5, task);
    auto p2 = split_ids(items, 6, task);
    CHECK(p1.train_ids == p1b.train_ids);
    auto s1 = fit_min_max(t, p1.train_ids);
    auto s1b = fit_min_max(t, p1b.train_ids);
    CHECK(s1.min == s1b.min);
    CHECK(s1.max == s1b.max);
    if (p1.train_ids != p2.train_ids) {
        auto s2 = fit_min_max(t, p2.train_ids);
        CHECK((s1.min != s2.min || s1.max != s2.max));
    }
}

TEST_CASE("build_subgraphs produces one typed edge per gene in the subset") {
    TempCsv csv(make_rows(6));
    auto genes = load_gene_csv(csv.path);
    auto images = tiny_features({"s0", "s1", "s2", "s3", "s4", "s5"});

    auto full = build_subgraphs(genes, images, {"APOE", "PSEN1", "PSEN2"});
    REQUIRE(full.subgraphs.size() == 6);
    for (const auto& sg : full.subgraphs) {
        CHECK(sg.genes.size() == 3); // |E| = 3, one edge per gene node
        CHECK(sg.genes[0].name == "APOE");
        CHECK(sg.genes[0].features.numel() == 1);
        CHECK(sg.genes[1].features.numel() == 4);
        CHECK(sg.genes[2].features.numel() == 4);
        CHECK(sg.image.numel() == 6);
    }

    auto pair = build_subgraphs(genes, images, {"psen1", "psen2"});
    for (const auto& sg : pair.subgraphs) {
        CHECK(sg.genes.size() == 2);
        CHECK(sg.genes[0].name == "PSEN1");
        CHECK(sg.genes[1].name == "PSEN2");
    }
}

TEST_CASE("build_subgraphs keeps the id intersection and logs the rest") {
    std::string content = kHeader;
    content += "a,CN,0.1,1,2,3,4,5,6,7,8\n";
    content += "b,AD,0.2,1,2,3,4,5,6,7,8\n";
    TempCsv csv(content);
    auto genes = load_gene_csv(csv.path);
    auto images = tiny_features({"b", "c"});
    auto result = build_subgraphs(genes, images, {"APOE", "PSEN1", "PSEN2"});
    REQUIRE(result.subgraphs.size() == 1);
    CHECK(result.subgraphs[0].sample_id == "b");
    std::set<std::string> skipped(result.skipped_ids.begin(), result.skipped_ids.end());
    CHECK(skipped == std::set<std::string>{"a", "c"});
}

TEST_CASE("build_subgraphs is input-order independent") {
    TempCsv csv(make_rows(8));
    auto genes = load_gene_csv(csv.path);
    auto images = tiny_features({"s0", "s1", "s2", "s3", "s4", "s5", "s6", "s7"});
    auto a = build_subgraphs(genes, images, {"APOE", "PSEN1", "PSEN2"});

    std::reverse(genes.rows.begin(), genes.rows.end());
    std::reverse(images.rows.begin(), images.rows.end());
    auto b = build_subgraphs(genes, images, {"APOE", "PSEN1", "PSEN2"});

    REQUIRE(a.subgraphs.size() == b.subgraphs.size());
    for (std::size_t i = 0; i < a.subgraphs.size(); ++i) {
        CHECK(a.subgraphs[i].sample_id == b.subgraphs[i].sample_id);
        for (std::size_t g = 0; g < 3; ++g)
            for (std::size_t j = 0; j < a.subgraphs[i].genes[g].features.numel(); ++j)
                CHECK(a.subgraphs[i].genes[g].features.data()[j] ==
                      b.subgraphs[i].genes[g].features.data()[j]);
    }
}

TEST_CASE("build_subgraphs with no matched ids is an empty-dataset error") {
    TempCsv csv(make_rows(3));
    auto genes = load_gene_csv(csv.path);
    auto images = tiny_features({"x", "y"});
    CHECK_THROWS_AS(build_subgraphs(genes, images, {"APOE"}), EmptyDatasetError);
}

TEST_CASE("split is stratified 80-20 with deterministic seeding") {
    std::vector<std::pair<std::string, Cls>> items;
    for (int i = 0; i < 10; ++i) items.emplace_back("cn" + std::to_string(i), Cls::CN);
    for (int i = 0; i < 10; ++i) items.emplace_back("ad" + std::to_string(i), Cls::AD);
    Task task = Task::from_name("ad_vs_cn");

    auto p = split_ids(items, 123, task);
    CHECK(p.train_ids.size() == 16);
    CHECK(p.test_ids.size() == 4);
    int test_cn = 0, test_ad = 0;
    for (const auto& id : p.test_ids) (id[0] == 'c' ? test_cn : test_ad)++;
    CHECK(test_cn == 2);
    CHECK(test_ad == 2);

    auto p2 = split_ids(items, 123, task);
    CHECK(p.train_ids == p2.train_ids);
    CHECK(p.test_ids == p2.test_ids);

    // disjoint and covering
    std::set<std::string> all(p.train_ids.begin(), p.train_ids.end());
    for (const auto& id : p.test_ids) CHECK(all.insert(id).second);
    CHECK(all.size() == 20);
}

TEST_CASE("binary task filters out the third class") {
    std::vector<std::pair<std::string, Cls>> items;
    for (int i = 0; i < 6; ++i) items.emplace_back("cn" + std::to_string(i), Cls::CN);
    for (int i = 0; i < 6; ++i) items.emplace_back("mci" + std::to_string(i), Cls::MCI);
    for (int i = 0; i < 6; ++i) items.emplace_back("ad" + std::to_string(i), Cls::AD);
    auto p = split_ids(items, 9, Task::from_name("ad_vs_cn"));
    for (const auto& id : p.train_ids) CHECK(id.substr(0, 3) != "mci");
    for (const auto& id : p.test_ids) CHECK(id.substr(0, 3) != "mci");
    CHECK(p.train_ids.size() + p.test_ids.size() == 12);
}

TEST_CASE("split rejects classes with fewer than two samples") {
    std::vector<std::pair<std::string, Cls>> items = {{"a", Cls::AD}, {"b", Cls::CN},
                                                      {"c", Cls::CN}};
    CHECK_THROWS_AS(split_ids(items, 1, Task::from_name("ad_vs_cn")), ContractError);
}

TEST_CASE("task label mapping follows the disease-positive convention") {
    Task ad_cn = Task::from_name("ad_vs_cn");
    CHECK(ad_cn.n_classes() == 2);
    CHECK(ad_cn.target_of(Cls::AD) == 1);
    CHECK(ad_cn.target_of(Cls::CN) == 0);
    CHECK(ad_cn.positive_class() == 1);
    CHECK_THROWS_AS(ad_cn.target_of(Cls::MCI), ContractError);

    Task three = Task::from_name("three_way");
    CHECK(three.n_classes() == 3);
    CHECK(three.target_of(Cls::CN) == 0);
    CHECK(three.target_of(Cls::MCI) == 1);
    CHECK(three.target_of(Cls::AD) == 2);
}

TEST_CASE("generate_synthetic is deterministic and validates n") {
    auto a = generate_synthetic(16, 42, 1.0, {"PSEN1", "PSEN2"});
    auto b = generate_synthetic(16, 42, 1.0, {"PSEN1", "PSEN2"});
    REQUIRE(a.genes.rows.size() == 16);
    REQUIRE(a.images.rows.size() == 16);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(a.genes.rows[i].sample_id == b.genes.rows[i].sample_id);
        CHECK(a.genes.rows[i].psen1 == b.genes.rows[i].psen1);
        CHECK(a.images.rows[i].values == b.images.rows[i].values);
    }
    int cn = 0, ad = 0;
    for (const auto& [id, cls] : a.truth) (cls == Cls::CN ? cn : ad)++;
    CHECK(cn == 8);
    CHECK(ad == 8);

    CHECK_THROWS_AS(generate_synthetic(3, 1, 1.0, {"APOE"}), ContractError);
    CHECK_THROWS_AS(generate_synthetic(9, 1, 1.0, {"APOE"}), ContractError);
}

TEST_CASE("zero signal leaves features independent of labels") {
    auto data = generate_synthetic(2000, 7, 0.0, {"PSEN1", "PSEN2"});
    // gene columns: max class-conditional mean difference stays small
    std::array<double, 9> mean_cn{}, mean_ad{};
    std::size_t n_cn = 0, n_ad = 0;
    for (const auto& r : data.genes.rows) {
        std::array<double, 9> v = {r.apoe[0],  r.psen1[0], r.psen1[1], r.psen1[2], r.psen1[3],
                                   r.psen2[0], r.psen2[1], r.psen2[2], r.psen2[3]};
        auto& acc = r.label == Cls::CN ? mean_cn : mean_ad;
        (r.label == Cls::CN ? n_cn : n_ad)++;
        for (int i = 0; i < 9; ++i) acc[i] += v[i];
    }
    for (int i = 0; i < 9; ++i) {
        double diff = mean_cn[i] / n_cn - mean_ad[i] / n_ad;
        CHECK(std::fabs(diff) < 0.15);
    }
    // image columns: average absolute class-conditional mean difference
    std::vector<double> icn(kSyntheticImageDim, 0.0), iad(kSyntheticImageDim, 0.0);
    for (const auto& r : data.images.rows) {
        auto& acc = r.label == Cls::CN ? icn : iad;
        for (std::size_t j = 0; j < kSyntheticImageDim; ++j) acc[j] += r.values[j];
    }
    double avg_abs = 0.0;
    for (std::size_t j = 0; j < kSyntheticImageDim; ++j)
        avg_abs += std::fabs(icn[j] / n_cn - iad[j] / n_ad);
    avg_abs /= kSyntheticImageDim;
    CHECK(avg_abs < 0.15);
}

TEST_CASE("signal 2 makes image features linearly separable on train data") {
    auto data = generate_synthetic(200, 11, 2.0, {"PSEN1", "PSEN2"});
    const std::size_t n = data.images.rows.size();
    // least-squares probe: minimal-norm w solving Xw = y via the Gram matrix
    std::vector<double> gram(n * n, 0.0), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = data.images.rows[i].label == Cls::AD ? 1.0 : -1.0;
        for (std::size_t j = 0; j <= i; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < kSyntheticImageDim; ++k)
                dot += data.images.rows[i].values[k] * data.images.rows[j].values[k];
            gram[i * n + j] = gram[j * n + i] = dot;
        }
        gram[i * n + i] += 1e-8; // conditioning
    }
    // Gaussian elimination with partial pivoting on [gram | y]
    std::vector<double> a = gram, b = y;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r * n + col] / a[col * n + col];
            for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> coef(n);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t k = r + 1; k < n; ++k) acc -= a[r * n + k] * coef[k];
        coef[r] = acc / a[r * n + r];
    }
    // predictions: sign of gram . coef (same as X w with w = X^T coef)
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double score = 0.0;
        for (std::size_t j = 0; j < n; ++j) score += gram[i * n + j] * coef[j];
        if ((score > 0.0) == (y[i] > 0.0)) ++correct;
    }
    CHECK(static_cast<double>(correct) / n >= 0.90);
}
