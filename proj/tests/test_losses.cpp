#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sccaf/counterfactual.hpp"
#include "sccaf/encoder.hpp"
#include "sccaf/losses.hpp"
#include "support/fixtures.hpp"

using namespace sccaf;

TEST_CASE("prediction loss hand cases") {
    // uniform logits -> ln 2
    Tensor uniform = Tensor::frozen(3, 2, {0, 0, 0, 0, 0, 0});
    std::vector<int> labels = {0, 1, 0};
    CHECK(prediction_loss(uniform, labels, {0, 1, 2}).item() == Catch::Approx(std::log(2.0)));

    // strong margin -> loss ~ 0
    Tensor strong = Tensor::frozen(2, 2, {20, 0, 0, 20});
    CHECK(prediction_loss(strong, {0, 1}, {0, 1}).item() < 1e-8);

    // hand-computed softmax CE: logits [[1,0],[0,1]], labels [0,1]
    Tensor l = Tensor::frozen(2, 2, {1, 0, 0, 1});
    CHECK(prediction_loss(l, {0, 1}, {0, 1}).item() ==
          Catch::Approx(std::log(1.0 + std::exp(-1.0))));

    CHECK_THROWS_AS(prediction_loss(uniform, labels, {}), contract_error);
}

TEST_CASE("prediction loss is permutation-invariant over the index set") {
    Tensor logits = testsupport::random_tensor(6, 2, 4);
    std::vector<int> labels = {0, 1, 1, 0, 1, 0};
    const double a = prediction_loss(logits, labels, {0, 2, 4, 5}).item();
    const double b = prediction_loss(logits, labels, {5, 0, 4, 2}).item();
    CHECK(a == Catch::Approx(b).epsilon(1e-12));
}

TEST_CASE("invariance loss hand cases") {
    // perfect alignment and orthogonality -> 0
    Tensor c = Tensor::frozen(2, 2, {1, 0, 1, 0});
    Tensor e = Tensor::frozen(2, 2, {0, 1, 0, 1});
    std::vector<std::vector<int>> env_cf = {{1}, {0}};      // c_0 == c_1
    std::vector<std::vector<int>> content_cf = {{1}, {0}};  // e_0 == e_1
    CHECK(invariance_loss(c, e, env_cf, content_cf, 0.01, DisKind::cosine).item() ==
          Catch::Approx(0.0).margin(1e-9));

    // c parallel to e, zero dis terms, gamma = 0.01 -> 0.01 (K cancels)
    Tensor cp = Tensor::frozen(1, 2, {1, 0});
    Tensor ep = Tensor::frozen(1, 2, {1, 0});
    std::vector<std::vector<int>> empty = {{}};
    CHECK(invariance_loss(cp, ep, empty, empty, 0.01, DisKind::cosine).item() ==
          Catch::Approx(0.01));

    // cosine dis of orthogonal unit rows is 1; l2 dis is 2
    Tensor a = Tensor::frozen(2, 2, {1, 0, 0, 1});
    Tensor zeros = Tensor::frozen(2, 2, {1, 0, 1, 0});  // orthogonal pair in C only
    std::vector<std::vector<int>> pair01 = {{1}, {}};
    const double cos_loss =
        invariance_loss(a, zeros, pair01, {{}, {}}, 0.0, DisKind::cosine).item();
    CHECK(cos_loss == Catch::Approx(1.0));
    const double l2_loss = invariance_loss(a, zeros, pair01, {{}, {}}, 0.0, DisKind::l2).item();
    CHECK(l2_loss == Catch::Approx(2.0));
}

TEST_CASE("sufficiency loss hand cases") {
    // all-zero latents: every p = 0.5
    Tensor h0 = Tensor::frozen(3, 2, {0, 0, 0, 0, 0, 0});
    CHECK(sufficiency_loss(h0, {{0, 1}}, {{0, 2}}).item() == Catch::Approx(std::log(2.0)));

    // saturated margins
    Tensor hs = Tensor::frozen(4, 1, {2, 10, 4, -5});  // dots: 0*1 -> 20, 2*3 -> -20
    CHECK(sufficiency_loss(hs, {{0, 1}}, {{2, 3}}).item() < 1e-8);

    // one positive pair with dot 1 -> -log sigmoid(1)
    Tensor h1 = Tensor::frozen(2, 1, {1, 1});
    CHECK(sufficiency_loss(h1, {{0, 1}}, {}).item() ==
          Catch::Approx(std::log(1.0 + std::exp(-1.0))));

    CHECK_THROWS_AS(sufficiency_loss(h0, {}, {}), contract_error);
}

TEST_CASE("supervised contrastive loss hand cases") {
    // two nodes, same label, identical normalized content -> loss 0
    Tensor c = Tensor::frozen(2, 2, {1, 0, 2, 0});
    auto r = supervised_contrastive_loss(c, {1, 1}, 1.0, {0, 1});
    CHECK(r.value.item() == Catch::Approx(0.0).margin(1e-9));
    CHECK(r.skipped_anchors == 0);

    // two anchors of different labels -> both positive sets empty
    auto r2 = supervised_contrastive_loss(c, {0, 1}, 1.0, {0, 1});
    CHECK(r2.value.item() == 0.0);
    CHECK(r2.skipped_anchors == 2);

    // three nodes, labels [0,0,1]: hand expansion
    Tensor c3 = Tensor::frozen(3, 2, {1, 0, 1, 0, 0, 1});
    auto r3 = supervised_contrastive_loss(c3, {0, 0, 1}, 1.0, {0, 1, 2});
    const double term = std::log(1.0 + std::exp(-1.0) * std::exp(0.0) / std::exp(0.0));
    // per-anchor term for node 0: -log(e / (e + 1)) = ln(1 + e^-1)
    CHECK(r3.skipped_anchors == 1);
    CHECK(r3.value.item() == Catch::Approx(std::log(1.0 + std::exp(-1.0))));
    (void)term;

    CHECK_THROWS_AS(supervised_contrastive_loss(c, {1, 1}, 1.0, {0}), contract_error);
}

TEST_CASE("supervised contrastive loss is scale-invariant in C") {
    Tensor c = testsupport::random_tensor(8, 3, 12);
    std::vector<int> labels = {0, 1, 0, 1, 1, 0, 0, 1};
    auto pool = testsupport::iota_indices(8);
    const double base = supervised_contrastive_loss(c, labels, 0.5, pool).value.item();
    std::vector<double> scaled = c.values();
    for (double& x : scaled) x *= 7.0;
    const double after =
        supervised_contrastive_loss(Tensor::frozen(8, 3, scaled), labels, 0.5, pool).value.item();
    CHECK(std::abs(base - after) < 1e-9);
}

TEST_CASE("environmental loss hand cases") {
    // orthogonal unit rows -> cosine distance 1
    Tensor e = Tensor::frozen(2, 2, {1, 0, 0, 1});
    CHECK(environmental_loss(e, {{1}, {}}, DisKind::cosine).item() == Catch::Approx(1.0));

    // identical rows -> 0
    Tensor same = Tensor::frozen(3, 2, {1, 1, 1, 1, 1, 1});
    CHECK(environmental_loss(same, {{1}, {2}, {0}}, DisKind::cosine).item() ==
          Catch::Approx(0.0).margin(1e-12));

    // antipodal rows -> maximum distance 2
    Tensor anti = Tensor::frozen(2, 2, {1, 0, -1, 0});
    CHECK(environmental_loss(anti, {{1}, {0}}, DisKind::cosine).item() == Catch::Approx(2.0));

    // empty lists are excluded from the outer mean
    int empties = 0;
    CHECK(environmental_loss(anti, {{}, {}}, DisKind::cosine, &empties).item() == 0.0);
    CHECK(empties == 2);

    // bounded in [0, 2] with cosine distance
    Tensor r = testsupport::random_tensor(10, 3, 8);
    const double v = environmental_loss(r, {{1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}, {0}},
                                        DisKind::cosine)
                         .item();
    CHECK(v >= 0.0);
    CHECK(v <= 2.0);
}

TEST_CASE("composite objectives arithmetic") {
    auto scalar = [](double v) { return Tensor::frozen(1, 1, {v}); };
    // pretraining: 0.5 + 0.01*0.2 - 0.1*0.3 = 0.472
    CHECK(pretrain_objective(scalar(0.5), scalar(0.2), scalar(0.3), 0.01, 0.1).item() ==
          Catch::Approx(0.472));
    // omega = eta = 0 degenerates to the prediction loss
    CHECK(pretrain_objective(scalar(0.7), scalar(9.0), scalar(9.0), 0.0, 0.0).item() ==
          Catch::Approx(0.7));
    // increasing the environmental loss decreases the objective
    CHECK(pretrain_objective(scalar(0.5), scalar(0.2), scalar(0.9), 0.01, 0.1).item() <
          pretrain_objective(scalar(0.5), scalar(0.2), scalar(0.3), 0.01, 0.1).item());

    LossWeights w;
    w.alpha = 0.2;
    w.beta = 0.1;
    w.omega = 0.01;
    w.eta = 0.1;
    CHECK(train_objective(scalar(1), scalar(1), scalar(1), scalar(1), scalar(1), w).item() ==
          Catch::Approx(1.21));
    LossWeights zero;
    zero.alpha = zero.beta = zero.omega = zero.eta = 0.0;
    CHECK(train_objective(scalar(0.42), scalar(9), scalar(9), scalar(9), scalar(9), zero).item() ==
          Catch::Approx(0.42));
}

TEST_CASE("CAF degeneracy: omega = eta = 0 equals pred + alpha inv + beta suf") {
    TabularGraphDataset ds = testsupport::random_dataset(12, 4, 0.3, 31);
    Tensor a_hat = sym_normalize(ds.graph);
    auto [enc, head] = init_params(4, 6, 3, 2);
    Tape tape;
    ModelVars vars = watch(tape, enc, head);
    LatentState state = encode(ds.features, a_hat, vars);
    Tensor logits = predict(state.c, vars);

    auto pool = testsupport::iota_indices(12);
    auto cf = build_counterfactual_index(state.h, ds.labels, ds.sensitive, 2, 2, pool);
    auto negatives = sample_negative_edges(ds.graph, 4, 3);

    Tensor pred = prediction_loss(logits, ds.labels, pool);
    Tensor inv = invariance_loss(state.c, state.e, cf.env_cf, cf.content_cf, 0.01, DisKind::cosine);
    Tensor suf = sufficiency_loss(state.h, ds.graph.edges(), negatives);
    Tensor sc = Tensor::frozen(1, 1, {0.0});
    Tensor env = Tensor::frozen(1, 1, {0.0});

    LossWeights w;
    w.alpha = 0.2;
    w.beta = 0.1;
    w.omega = 0.0;
    w.eta = 0.0;
    const double total = train_objective(pred, inv, suf, sc, env, w).item();
    const double caf = pred.item() + 0.2 * inv.item() + 0.1 * suf.item();
    CHECK(total == Catch::Approx(caf).margin(1e-9));
}

TEST_CASE("all loss terms are non-negative on random inputs") {
    std::mt19937_64 rng(50);
    for (int trial = 0; trial < 10; ++trial) {
        TabularGraphDataset ds = testsupport::random_dataset(15, 3, 0.3, rng());
        Tensor a_hat = sym_normalize(ds.graph);
        auto [enc, head] = init_params(3, 5, 2, rng());
        Tape tape;
        ModelVars vars = watch(tape, enc, head);
        LatentState state = encode(ds.features, a_hat, vars);
        Tensor logits = predict(state.c, vars);
        auto pool = testsupport::iota_indices(15);
        auto cf = build_counterfactual_index(state.h, ds.labels, ds.sensitive, 2, 2, pool);

        CHECK(prediction_loss(logits, ds.labels, pool).item() >= 0.0);
        CHECK(invariance_loss(state.c, state.e, cf.env_cf, cf.content_cf, 0.01, DisKind::cosine)
                  .item() >= 0.0);
        if (!ds.graph.edges().empty()) {
            auto neg = sample_negative_edges(
                ds.graph, std::min(ds.graph.edges().size(), ds.graph.non_edge_count()), 1);
            CHECK(sufficiency_loss(state.h, ds.graph.edges(), neg).item() >= 0.0);
        }
        CHECK(supervised_contrastive_loss(state.c, ds.labels, 0.5, pool).value.item() >= -1e-9);
        const double env = environmental_loss(state.e, cf.env_neighbors, DisKind::cosine).item();
        CHECK(env >= 0.0);
        CHECK(env <= 2.0);
    }
}
