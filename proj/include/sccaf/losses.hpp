#pragma once

// The five loss terms and the two composite objectives (pretraining and
// training phases). Every function builds a differentiable subgraph on the
// operand tape and returns a 1x1 tensor.

#include <cstddef>
#include <string>
#include <vector>

#include "sccaf/common.hpp"
#include "sccaf/counterfactual.hpp"
#include "sccaf/graph.hpp"
#include "sccaf/tensor.hpp"

namespace sccaf {

enum class DisKind { cosine, l2 };

inline DisKind dis_kind_from_string(const std::string& s) {
    if (s == "cosine") return DisKind::cosine;
    if (s == "l2") return DisKind::l2;
    throw contract_error("unknown distance kind '" + s + "'");
}

struct LossWeights {
    double alpha = 0.2;
    double beta = 0.1;
    double gamma = 0.01;
    double omega = 0.01;
    double eta = 0.1;
    double tau = 0.5;
    int k = 4;
    int k_prime = 10;
    DisKind dis_kind = DisKind::cosine;

    void validate() const {
        if (tau <= 0.0) throw contract_error("LossWeights: tau must be positive");
        if (alpha < 0 || beta < 0 || gamma < 0 || omega < 0 || eta < 0)
            throw contract_error("LossWeights: weights must be non-negative");
        if (k < 1 || k_prime < 1) throw contract_error("LossWeights: K and K' must be positive");
    }
};

// Per-epoch scalar snapshot for the run log.
struct LossReport {
    double pred = 0.0, inv = 0.0, suf = 0.0, sc = 0.0, env = 0.0;
    double total = 0.0;
    int skipped_env_cf = 0, skipped_content_cf = 0, skipped_sc_anchors = 0, skipped_env_nb = 0;
};

namespace detail {

// Per-row cosine similarity of two row-aligned matrices (m x 1 output).
inline Tensor rowwise_cosine(const Tensor& a, const Tensor& b) {
    return sum(mul(row_l2_normalize(a), row_l2_normalize(b)), 1);
}

// cosine: 1 - cos(a_r, b_r), bounded [0, 2]. l2: ||a_r - b_r||^2.
inline Tensor rowwise_distance(const Tensor& a, const Tensor& b, DisKind kind) {
    if (kind == DisKind::cosine) return add_scalar(scale(rowwise_cosine(a, b), -1.0), 1.0);
    Tensor diff = sub(a, b);
    return sum(mul(diff, diff), 1);
}

}  // namespace detail

// Mean two-class cross-entropy over idx via stable log-softmax.
inline Tensor prediction_loss(const Tensor& logits, const std::vector<int>& labels,
                              const std::vector<int>& idx) {
    if (idx.empty()) throw contract_error("prediction_loss: empty index set");
    const int m = static_cast<int>(idx.size());
    Tensor ls = log_softmax_rows(gather_rows(logits, idx));
    std::vector<double> onehot(static_cast<std::size_t>(m) * 2, 0.0);
    for (int r = 0; r < m; ++r) {
        const int y = labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])];
        if (y < 0) throw contract_error("prediction_loss: unlabeled node in index set");
        onehot[static_cast<std::size_t>(r) * 2 + y] = 1.0;
    }
    Tensor mask = Tensor::frozen(m, 2, std::move(onehot));
    return scale(sum(mul(ls, mask)), -1.0 / m);
}

// Pulls c_i toward the content of its environment counterfactuals, e_i toward
// the environment of its content counterfactuals, and keeps (c_i, e_i)
// orthogonal. Averaging over counterfactual pairs is renormalized to the
// contributing pairs; the orthogonality term always covers every node.
inline Tensor invariance_loss(const Tensor& c, const Tensor& e,
                              const std::vector<std::vector<int>>& env_cf,
                              const std::vector<std::vector<int>>& content_cf, double gamma,
                              DisKind kind) {
    const int n = c.rows();
    auto pair_lists = [n](const std::vector<std::vector<int>>& lists, std::vector<int>& anchors,
                          std::vector<int>& partners) {
        for (int i = 0; i < n; ++i)
            for (int j : lists[static_cast<std::size_t>(i)]) {
                anchors.push_back(i);
                partners.push_back(j);
            }
    };
    std::vector<int> ie, je, ic, jc;
    pair_lists(env_cf, ie, je);
    pair_lists(content_cf, ic, jc);

    Tensor loss = scale(mean(abs(detail::rowwise_cosine(c, e))), gamma);
    if (!ie.empty()) {
        Tensor d = detail::rowwise_distance(gather_rows(c, ie), gather_rows(c, je), kind);
        loss = add(loss, scale(sum(d), 1.0 / static_cast<double>(ie.size())));
    }
    if (!ic.empty()) {
        Tensor d = detail::rowwise_distance(gather_rows(e, ic), gather_rows(e, jc), kind);
        loss = add(loss, scale(sum(d), 1.0 / static_cast<double>(ic.size())));
    }
    return loss;
}

// Link-reconstruction cross-entropy over positive edges and sampled
// negatives, p_ij = sigmoid(h_i . h_j), in the stable softplus form.
inline Tensor sufficiency_loss(const Tensor& h, const std::vector<Edge>& edges,
                               const std::vector<Edge>& negatives) {
    if (edges.empty()) throw contract_error("sufficiency_loss: no positive edges");
    std::vector<int> is, js;
    std::vector<double> targets;
    is.reserve(edges.size() + negatives.size());
    for (const Edge& e : edges) {
        is.push_back(e.first);
        js.push_back(e.second);
        targets.push_back(1.0);
    }
    for (const Edge& e : negatives) {
        is.push_back(e.first);
        js.push_back(e.second);
        targets.push_back(0.0);
    }
    const int p = static_cast<int>(is.size());
    Tensor z = sum(mul(gather_rows(h, is), gather_rows(h, js)), 1);  // p x 1 logits
    Tensor a = Tensor::frozen(p, 1, std::move(targets));
    // -a log p - (1-a) log(1-p) == softplus(z) - a z
    return mean(sub(softplus(z), mul(a, z)));
}

struct ScLossResult {
    Tensor value;
    int skipped_anchors = 0;
};

// Temperature-scaled supervised contrastive loss over L2-normalized content
// rows, mean over anchors with at least one positive.
inline ScLossResult supervised_contrastive_loss(const Tensor& c, const std::vector<int>& labels,
                                                double tau, const std::vector<int>& anchor_set) {
    if (tau <= 0.0) throw contract_error("supervised_contrastive_loss: tau must be positive");
    if (anchor_set.size() < 2)
        throw contract_error("supervised_contrastive_loss: need at least two anchors");
    const int m = static_cast<int>(anchor_set.size());
    Tensor chat = row_l2_normalize(gather_rows(c, anchor_set));
    Tensor sim = scale(matmul(chat, transpose(chat)), 1.0 / tau);  // m x m

    std::vector<double> offdiag(static_cast<std::size_t>(m) * m, 1.0);
    for (int i = 0; i < m; ++i) offdiag[static_cast<std::size_t>(i) * m + i] = 0.0;

    std::vector<double> pos_w(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<double> row_w(static_cast<std::size_t>(m), 0.0);
    int contributing = 0;
    for (int i = 0; i < m; ++i) {
        const int yi = labels[static_cast<std::size_t>(anchor_set[static_cast<std::size_t>(i)])];
        int positives = 0;
        for (int p = 0; p < m; ++p)
            if (p != i &&
                labels[static_cast<std::size_t>(anchor_set[static_cast<std::size_t>(p)])] == yi)
                ++positives;
        if (positives == 0) continue;
        ++contributing;
        row_w[static_cast<std::size_t>(i)] = 1.0;
        for (int p = 0; p < m; ++p)
            if (p != i &&
                labels[static_cast<std::size_t>(anchor_set[static_cast<std::size_t>(p)])] == yi)
                pos_w[static_cast<std::size_t>(i) * m + p] = 1.0 / positives;
    }
    ScLossResult res;
    res.skipped_anchors = m - contributing;
    if (contributing == 0) {
        res.value = Tensor::frozen(1, 1, {0.0});
        return res;
    }
    // log-denominator per anchor: log sum_{a != i} exp(sim_ia). Normalized
    // rows bound |sim| by 1/tau, so plain exp is safe.
    Tensor den = log(sum(mul(exp(sim), Tensor::frozen(m, m, std::move(offdiag))), 1));  // m x 1
    Tensor pos_term = sum(mul(sim, Tensor::frozen(m, m, std::move(pos_w))));
    Tensor den_term = sum(mul(den, Tensor::frozen(m, 1, std::move(row_w))));
    res.value = scale(sub(den_term, pos_term), 1.0 / contributing);
    return res;
}

// Mean distance between a node's environment row and those of its
// opposite-sensitive near neighbors. Bounded: cosine by construction, l2 by
// a 4.0 per-pair clamp. Nodes with empty lists are excluded from the mean.
inline Tensor environmental_loss(const Tensor& e,
                                 const std::vector<std::vector<int>>& env_neighbors,
                                 DisKind kind, int* empty_counter = nullptr) {
    const int n = e.rows();
    std::vector<int> is, js;
    std::vector<double> weights;
    int contributing = 0;
    for (int i = 0; i < n; ++i) {
        const auto& nb = env_neighbors[static_cast<std::size_t>(i)];
        if (nb.empty()) continue;
        ++contributing;
        for (int j : nb) {
            is.push_back(i);
            js.push_back(j);
            weights.push_back(1.0 / static_cast<double>(nb.size()));
        }
    }
    if (empty_counter != nullptr) *empty_counter = n - contributing;
    if (contributing == 0) return Tensor::frozen(1, 1, {0.0});
    Tensor d = detail::rowwise_distance(gather_rows(e, is), gather_rows(e, js), kind);
    if (kind == DisKind::l2) d = clamp(d, 0.0, 4.0);
    const int pairs = static_cast<int>(weights.size());
    Tensor w = Tensor::frozen(pairs, 1, std::move(weights));
    return scale(sum(mul(w, d)), 1.0 / contributing);
}

// Pretraining objective: L_pred + omega L_sc - eta L_env.
inline Tensor pretrain_objective(const Tensor& pred, const Tensor& sc, const Tensor& env,
                                 double omega, double eta) {
    return add(pred, sub(scale(sc, omega), scale(env, eta)));
}

// Training objective: L_pred + alpha L_inv + beta L_suf + omega L_sc - eta L_env.
inline Tensor train_objective(const Tensor& pred, const Tensor& inv, const Tensor& suf,
                              const Tensor& sc, const Tensor& env, const LossWeights& w) {
    Tensor total = add(pred, scale(inv, w.alpha));
    total = add(total, scale(suf, w.beta));
    total = add(total, scale(sc, w.omega));
    return sub(total, scale(env, w.eta));
}

}  // namespace sccaf
