#include "doctest.h"

#include "bgrl/bgnn.hpp"
#include "bgrl/errors.hpp"
#include "bgrl/random.hpp"

#include "oracles.hpp"

#include <cmath>

using namespace bgrl;

namespace {

BgnnConfig micro_config(WeightMode mode = WeightMode::Learned) {
    BgnnConfig cfg;
    cfg.genes = {{"G1", 2}, {"G2", 2}};
    cfg.image_dim = 4;
    cfg.a_dim = 3;
    cfg.d_h = 3;
    cfg.n_classes = 2;
    cfg.mode = mode;
    return cfg;
}

BipartiteSubgraph micro_subgraph(std::uint64_t seed, const BgnnConfig& cfg) {
    Prng rng(seed);
    BipartiteSubgraph sg;
    sg.sample_id = "micro" + std::to_string(seed);
    for (const auto& spec : cfg.genes) {
        sg.genes.push_back({spec.name, Tensor::from_data({spec.dim},
                                                         oracle::random_vec(spec.dim, rng))});
    }
    sg.image = Tensor::from_data({cfg.image_dim}, oracle::random_vec(cfg.image_dim, rng));
    sg.label = Cls::AD;
    return sg;
}

// Scalar-loop oracle for one message-passing round, written from scratch.
std::vector<double> aggregate_oracle(const BipartiteSubgraph& sg, const BgnnModel& model) {
    const auto& cfg = model.config;
    std::vector<double> acc(cfg.d_h, 0.0);
    if (cfg.include_self) {
        for (std::size_t j = 0; j < cfg.d_h; ++j)
            for (std::size_t k = 0; k < cfg.image_dim; ++k)
                acc[j] += model.v_image.data()[j * cfg.image_dim + k] * sg.image.data()[k];
    }
    for (std::size_t t = 0; t < cfg.genes.size(); ++t) {
        const auto& spec = cfg.genes[t];
        const GeneNode* node = nullptr;
        for (const auto& g : sg.genes)
            if (g.name == spec.name) node = &g;
        REQUIRE(node != nullptr);
        double e = 1.0;
        if (cfg.mode == WeightMode::Learned) {
            // z_t = phi_t . alpha reshaped [d x image_dim]
            std::vector<double> z(spec.dim * cfg.image_dim, 0.0);
            for (std::size_t r = 0; r < z.size(); ++r)
                for (std::size_t a = 0; a < cfg.a_dim; ++a)
                    z[r] += model.phi[t].data()[r * cfg.a_dim + a] * model.alpha.data()[a];
            double pre = 0.0;
            for (std::size_t a = 0; a < spec.dim; ++a)
                for (std::size_t b = 0; b < cfg.image_dim; ++b)
                    pre += node->features.data()[a] * z[a * cfg.image_dim + b] * sg.image.data()[b];
            e = pre > 0.0 ? pre : 0.0;
        }
        for (std::size_t j = 0; j < cfg.d_h; ++j) {
            double h = 0.0;
            for (std::size_t a = 0; a < spec.dim; ++a)
                h += model.v_gene[t].data()[j * spec.dim + a] * node->features.data()[a];
            acc[j] += e * h;
        }
    }
    for (auto& v : acc) v = v > 0.0 ? v : 0.0;
    return acc;
}

} // namespace

TEST_CASE("init_model is deterministic per seed and freezes alpha") {
    auto cfg = micro_config();
    auto a = init_model(cfg, 9);
    auto b = init_model(cfg, 9);
    auto c = init_model(cfg, 10);
    CHECK_FALSE(a.alpha.requires_grad());
    bool same = true, diff = false;
    auto pa = a.trainable_params();
    auto pb = b.trainable_params();
    auto pc = c.trainable_params();
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = 0; j < pa[i].numel(); ++j) {
            same = same && pa[i].data()[j] == pb[i].data()[j];
            diff = diff || pa[i].data()[j] != pc[i].data()[j];
        }
    for (std::size_t j = 0; j < cfg.a_dim; ++j)
        same = same && a.alpha.data()[j] == b.alpha.data()[j];
    CHECK(same);
    CHECK(diff);
}

TEST_CASE("edge matrices have shape d_t x image_dim and alpha is not in the optimizer") {
    auto cfg = micro_config();
    auto model = init_model(cfg, 3);
    for (std::size_t t = 0; t < cfg.genes.size(); ++t) {
        Tensor z = model.edge_matrix(t);
        CHECK(z.shape() == Shape{cfg.genes[t].dim, cfg.image_dim});
    }
    for (const auto& p : model.trainable_params()) CHECK(p.id() != model.alpha.id());
}

TEST_CASE("edge_weight zero input, quadratic form, and ReLU clamp") {
    Tensor z_eye = Tensor::from_data({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor v = Tensor::from_data({3}, {1.0, -2.0, 0.5});
    Tensor zero = Tensor::zeros({3});

    CHECK(edge_weight(zero, z_eye, v).item() == 0.0);
    double norm2 = 1.0 + 4.0 + 0.25;
    CHECK(edge_weight(v, z_eye, v).item() == doctest::Approx(norm2).epsilon(1e-14));

    // pre-activation forced to -3
    Tensor z_neg = Tensor::from_data({1, 1}, {-3.0});
    Tensor one = Tensor::from_data({1}, {1.0});
    CHECK(edge_weight(one, z_neg, one).item() == 0.0);

    CHECK_THROWS_AS(edge_weight(v, z_eye, Tensor::zeros({4})), DimensionError);
}

TEST_CASE("edge weight pre-activation is bilinear in both feature vectors") {
    Prng rng(15);
    Tensor z = Tensor::from_data({2, 3}, oracle::random_vec(6, rng));
    // choose features with a positive pre-activation so the ReLU is inactive
    Tensor x_p = Tensor::from_data({2}, {0.8, 0.3});
    Tensor x_img = Tensor::from_data({3}, {0.4, 0.9, 0.2});
    double base = edge_weight(x_p, z, x_img).item();
    if (base <= 0.0) {
        // flip z to make the form positive
        auto zd = z.mutable_data();
        for (auto& v : zd) v = -v;
        base = edge_weight(x_p, z, x_img).item();
    }
    REQUIRE(base > 0.0);
    for (double a : {0.5, 2.0, 3.75}) {
        Tensor ax = scale(x_p, a);
        Tensor bx = scale(x_img, a);
        CHECK(edge_weight(ax, z, x_img).item() == doctest::Approx(a * base).epsilon(1e-12));
        CHECK(edge_weight(x_p, z, bx).item() == doctest::Approx(a * base).epsilon(1e-12));
    }
    // a negative scalar drives the pre-activation negative and the ReLU clamps
    Tensor neg = scale(x_p, -1.0);
    CHECK(edge_weight(neg, z, x_img).item() == 0.0);
}

TEST_CASE("aggregate with all-zero gene features reduces to ReLU(h_img)") {
    auto cfg = micro_config(WeightMode::Learned);
    auto model = init_model(cfg, 21);
    BipartiteSubgraph sg = micro_subgraph(4, cfg);
    for (auto& g : sg.genes)
        for (auto& v : g.features.mutable_data()) v = 0.0;
    Tensor out = aggregate(sg, model);
    Tensor h_img = relu(fully_connected(sg.image, model.v_image));
    REQUIRE(out.numel() == h_img.numel());
    for (std::size_t i = 0; i < out.numel(); ++i) CHECK(out.data()[i] == h_img.data()[i]);
}

TEST_CASE("unit mode with equal nonnegative embeddings gives (G+1)*h") {
    BgnnConfig cfg;
    cfg.genes = {{"G1", 1}, {"G2", 1}};
    cfg.image_dim = 1;
    cfg.a_dim = 2;
    cfg.d_h = 3;
    cfg.mode = WeightMode::Unit;
    auto model = init_model(cfg, 33);
    // V maps chosen so every node embeds to the same nonnegative h = (1,2,0.5)
    std::vector<double> h = {1.0, 2.0, 0.5};
    model.v_image = Tensor::from_data({3, 1}, h, true);
    model.v_gene[0] = Tensor::from_data({3, 1}, h, true);
    model.v_gene[1] = Tensor::from_data({3, 1}, h, true);
    BipartiteSubgraph sg;
    sg.sample_id = "x";
    sg.genes = {{"G1", Tensor::from_data({1}, {1.0})}, {"G2", Tensor::from_data({1}, {1.0})}};
    sg.image = Tensor::from_data({1}, {1.0});
    Tensor out = aggregate(sg, model);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(out.data()[i] == doctest::Approx(3.0 * h[i]).epsilon(1e-14));
}

TEST_CASE("aggregate matches the scalar-loop oracle within 1e-12") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto cfg = micro_config(seed % 2 ? WeightMode::Learned : WeightMode::Unit);
        auto model = init_model(cfg, 100 + seed);
        BipartiteSubgraph sg = micro_subgraph(seed, cfg);
        Tensor got = aggregate(sg, model);
        auto expect = aggregate_oracle(sg, model);
        REQUIRE(got.numel() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i)
            CHECK(std::fabs(got.data()[i] - expect[i]) < 1e-12);
    }
}

TEST_CASE("gene node order does not change aggregate output") {
    auto cfg = micro_config(WeightMode::Learned);
    auto model = init_model(cfg, 55);
    BipartiteSubgraph sg = micro_subgraph(8, cfg);
    Tensor a = aggregate(sg, model);
    std::swap(sg.genes[0], sg.genes[1]);
    Tensor b = aggregate(sg, model);
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("predict with zero head gives uniform scores and class 0") {
    auto cfg = micro_config();
    auto model = init_model(cfg, 77);
    model.head_w = Tensor::zeros({2, cfg.d_h}, true);
    model.head_b = Tensor::zeros({2}, true);
    BipartiteSubgraph sg = micro_subgraph(3, cfg);
    Tensor scores = predict_scores(sg, model);
    REQUIRE(scores.numel() == 2);
    CHECK(scores.data()[0] == 0.0);
    CHECK(scores.data()[1] == 0.0);
    CHECK(predict_class(sg, model) == 0);
}

TEST_CASE("argmax is invariant under a constant shift of all head biases") {
    auto cfg = micro_config();
    auto model = init_model(cfg, 88);
    BipartiteSubgraph sg = micro_subgraph(5, cfg);
    int before = predict_class(sg, model);
    for (double kappa : {-3.0, 0.25, 10.0}) {
        auto shifted = model;
        shifted.head_b = Tensor::from_data(
            {2}, {model.head_b.data()[0] + kappa, model.head_b.data()[1] + kappa}, true);
        CHECK(predict_class(sg, shifted) == before);
    }
}

TEST_CASE("score gradients w.r.t. every phi and V pass finite differences") {
    auto cfg = micro_config(WeightMode::Learned);
    auto model = init_model(cfg, 99);
    BipartiteSubgraph sg = micro_subgraph(6, cfg);
    Tensor target = Tensor::from_data({2}, {1.0, 0.0});
    std::vector<Tensor> params = model.trainable_params();
    auto res = oracle::grad_check(
        [&]() { return mse_loss(predict_scores(sg, model), target); }, params);
    CHECK_MESSAGE(res.ok, res.where, " worst=", res.worst);
}

TEST_CASE("end-to-end bgnn loss gradcheck on a 3-sample batch") {
    auto cfg = micro_config(WeightMode::Learned);
    auto model = init_model(cfg, 111);
    std::vector<BipartiteSubgraph> sgs = {micro_subgraph(1, cfg), micro_subgraph(2, cfg),
                                          micro_subgraph(3, cfg)};
    std::vector<Tensor> onehot = {Tensor::from_data({2}, {0.0, 1.0}),
                                  Tensor::from_data({2}, {1.0, 0.0}),
                                  Tensor::from_data({2}, {0.0, 1.0})};
    auto params = model.trainable_params();
    auto res = oracle::grad_check(
        [&]() {
            Tensor total;
            for (std::size_t i = 0; i < sgs.size(); ++i) {
                Tensor scores = predict_scores(sgs[i], model);
                Tensor l = mse_loss(scores, onehot[i]);
                total = total.defined() ? add(total, l) : l;
            }
            return scale(total, 1.0 / 3.0);
        },
        params);
    CHECK_MESSAGE(res.ok, res.where, " worst=", res.worst);
}

TEST_CASE("train_gnn separates planted-signal data and keeps alpha frozen") {
    auto data = generate_synthetic(100, 5, 2.0, {"PSEN1", "PSEN2"});
    auto built = build_subgraphs(data.genes, data.images, {"APOE", "PSEN1", "PSEN2"});
    Task task = Task::from_name("ad_vs_cn");
    std::vector<int> targets;
    for (const auto& sg : built.subgraphs) targets.push_back(task.target_of(sg.label));

    BgnnConfig cfg;
    cfg.genes = resolve_gene_subset({"APOE", "PSEN1", "PSEN2"});
    cfg.image_dim = kSyntheticImageDim;
    cfg.n_classes = 2;
    auto model = init_model(cfg, 7);
    std::vector<double> alpha_before(model.alpha.data().begin(), model.alpha.data().end());

    GnnTrainOptions opts; // 800 epochs, lr 9e-3
    auto result = train_gnn(built.subgraphs, targets, model, opts);
    REQUIRE(result.loss_trace.size() == 800);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < built.subgraphs.size(); ++i)
        if (predict_class(built.subgraphs[i], model) == targets[i]) ++correct;
    double train_acc = static_cast<double>(correct) / built.subgraphs.size();
    CHECK(train_acc >= 0.95);

    for (std::size_t j = 0; j < model.alpha.numel(); ++j)
        CHECK(model.alpha.data()[j] == alpha_before[j]);
}

TEST_CASE("training is deterministic given data and init seeds") {
    auto data = generate_synthetic(24, 17, 1.0, {"PSEN1"});
    auto built = build_subgraphs(data.genes, data.images, {"APOE", "PSEN1", "PSEN2"});
    Task task = Task::from_name("ad_vs_cn");
    std::vector<int> targets;
    for (const auto& sg : built.subgraphs) targets.push_back(task.target_of(sg.label));

    BgnnConfig cfg;
    cfg.genes = resolve_gene_subset({"APOE", "PSEN1", "PSEN2"});
    cfg.image_dim = kSyntheticImageDim;
    GnnTrainOptions opts;
    opts.epochs = 30;

    auto m1 = init_model(cfg, 4);
    auto m2 = init_model(cfg, 4);
    auto r1 = train_gnn(built.subgraphs, targets, m1, opts);
    auto r2 = train_gnn(built.subgraphs, targets, m2, opts);
    for (std::size_t i = 0; i < r1.loss_trace.size(); ++i)
        CHECK(r1.loss_trace[i] == r2.loss_trace[i]);
}

TEST_CASE("unit mode never touches phi parameters during training") {
    auto data = generate_synthetic(16, 23, 1.0, {"PSEN2"});
    auto built = build_subgraphs(data.genes, data.images, {"APOE", "PSEN1", "PSEN2"});
    Task task = Task::from_name("ad_vs_cn");
    std::vector<int> targets;
    for (const auto& sg : built.subgraphs) targets.push_back(task.target_of(sg.label));

    BgnnConfig cfg;
    cfg.genes = resolve_gene_subset({"APOE", "PSEN1", "PSEN2"});
    cfg.image_dim = kSyntheticImageDim;
    cfg.mode = WeightMode::Unit;
    auto model = init_model(cfg, 2);
    std::vector<std::vector<double>> phi_before;
    for (const auto& p : model.phi)
        phi_before.emplace_back(p.data().begin(), p.data().end());

    GnnTrainOptions opts;
    opts.epochs = 25;
    train_gnn(built.subgraphs, targets, model, opts);

    for (std::size_t t = 0; t < model.phi.size(); ++t)
        for (std::size_t j = 0; j < model.phi[t].numel(); ++j)
            CHECK(model.phi[t].data()[j] == phi_before[t][j]);
}

TEST_CASE("collect_edge_weights: one record per subgraph, unit weights exactly 1") {
    auto data = generate_synthetic(12, 31, 1.0, {"PSEN1"});
    auto built = build_subgraphs(data.genes, data.images, {"APOE", "PSEN1", "PSEN2"});
    Task task = Task::from_name("ad_vs_cn");
    std::vector<int> targets;
    for (const auto& sg : built.subgraphs) targets.push_back(task.target_of(sg.label));

    BgnnConfig cfg;
    cfg.genes = resolve_gene_subset({"APOE", "PSEN1", "PSEN2"});
    cfg.image_dim = kSyntheticImageDim;

    cfg.mode = WeightMode::Unit;
    auto unit_model = init_model(cfg, 8);
    auto unit_records = collect_edge_weights(built.subgraphs, targets, unit_model);
    REQUIRE(unit_records.size() == built.subgraphs.size());
    for (const auto& rec : unit_records)
        for (const auto& [name, w] : rec.weights) CHECK(w == 1.0);

    cfg.mode = WeightMode::Learned;
    auto model = init_model(cfg, 8);
    auto records = collect_edge_weights(built.subgraphs, targets, model);
    REQUIRE(records.size() == built.subgraphs.size());
    for (const auto& rec : records) {
        CHECK(rec.weights.size() == 3);
        for (const auto& [name, w] : rec.weights) CHECK(w >= 0.0);
    }
}

TEST_CASE("average_weights implements both statistics exactly") {
    BgnnConfig cfg;
    cfg.genes = resolve_gene_subset({"APOE", "PSEN1", "PSEN2"});

    EdgeWeightRecord rec;
    rec.sample_id = "a";
    rec.truth = 1;
    rec.weights = {{"APOE", 0.0}, {"PSEN1", 0.5}, {"PSEN2", 0.0}};
    auto avg = average_weights({rec}, 1, cfg);
    CHECK(avg.n_records == 1);
    CHECK(avg.as_written["PSEN1"] == doctest::Approx(0.125)); // 0.5 / d_p with d_p = 4
    CHECK(avg.per_sample_mean["PSEN1"] == doctest::Approx(0.5));
    CHECK(avg.as_written["APOE"] == 0.0);
    CHECK(avg.per_sample_mean["APOE"] == 0.0);

    std::vector<EdgeWeightRecord> recs;
    for (double w : {1.0, 2.0, 3.0}) {
        EdgeWeightRecord r;
        r.sample_id = "s" + std::to_string((int)w);
        r.truth = 0;
        r.weights = {{"APOE", w}, {"PSEN1", 0.0}, {"PSEN2", 0.0}};
        recs.push_back(r);
    }
    auto avg2 = average_weights(recs, 0, cfg);
    CHECK(avg2.as_written["APOE"] == doctest::Approx(6.0));      // (1+2+3) / d_apoe, d = 1
    CHECK(avg2.per_sample_mean["APOE"] == doctest::Approx(2.0)); // (1+2+3) / 3 records

    CHECK_THROWS_AS(average_weights(recs, 1, cfg), UndefinedAverageError);
}
