#pragma once

// Constrained nearest-neighbor discovery in latent space: environment
// counterfactuals (same predicted label, opposite sensitive attribute),
// content counterfactuals (opposite predicted label, same sensitive
// attribute), and opposite-sensitive near neighbors. Exact O(n^2) search,
// squared L2 distance on the full latent row, ties broken by lower index.

#include <algorithm>
#include <cstddef>
#include <ostream>
#include <vector>

#include "sccaf/common.hpp"
#include "sccaf/tensor.hpp"

namespace sccaf {

struct CounterfactualIndex {
    std::vector<std::vector<int>> env_cf;         // K^e(i)
    std::vector<std::vector<int>> content_cf;     // K^c(i)
    std::vector<std::vector<int>> env_neighbors;  // K' opposite-sensitive neighbors
    int empty_env = 0;
    int empty_content = 0;
    int empty_env_neighbors = 0;
};

namespace detail {

inline double sq_l2_rows(const Tensor& h, int i, int j) {
    double acc = 0.0;
    for (int c = 0; c < h.cols(); ++c) {
        const double d = h.at(i, c) - h.at(j, c);
        acc += d * d;
    }
    return acc;
}

// K nearest pool members to each node under an admissibility predicate.
// Returns fewer than K when the candidate set is smaller.
template <class Admissible>
std::vector<std::vector<int>> knn_constrained(const Tensor& h, int k,
                                              const std::vector<int>& pool,
                                              Admissible admissible, int* empty_counter) {
    const int n = h.rows();
    std::vector<std::vector<int>> result(static_cast<std::size_t>(n));
    std::vector<std::pair<double, int>> cand;
    for (int i = 0; i < n; ++i) {
        cand.clear();
        for (int j : pool) {
            if (j == i || !admissible(i, j)) continue;
            cand.emplace_back(sq_l2_rows(h, i, j), j);
        }
        if (cand.empty()) {
            if (empty_counter != nullptr) ++*empty_counter;
            continue;
        }
        const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep),
                          cand.end());
        auto& out = result[static_cast<std::size_t>(i)];
        out.reserve(keep);
        for (std::size_t r = 0; r < keep; ++r) out.push_back(cand[r].second);
    }
    return result;
}

}  // namespace detail

inline std::vector<std::vector<int>> find_env_counterfactuals(const Tensor& h,
                                                              const std::vector<int>& y_hat,
                                                              const std::vector<int>& s, int k,
                                                              const std::vector<int>& pool,
                                                              int* empty_counter = nullptr) {
    if (k < 1) throw contract_error("find_env_counterfactuals: K must be >= 1");
    return detail::knn_constrained(
        h, k, pool,
        [&](int i, int j) {
            return y_hat[static_cast<std::size_t>(j)] == y_hat[static_cast<std::size_t>(i)] &&
                   s[static_cast<std::size_t>(j)] != s[static_cast<std::size_t>(i)];
        },
        empty_counter);
}

inline std::vector<std::vector<int>> find_content_counterfactuals(const Tensor& h,
                                                                  const std::vector<int>& y_hat,
                                                                  const std::vector<int>& s, int k,
                                                                  const std::vector<int>& pool,
                                                                  int* empty_counter = nullptr) {
    if (k < 1) throw contract_error("find_content_counterfactuals: K must be >= 1");
    return detail::knn_constrained(
        h, k, pool,
        [&](int i, int j) {
            return y_hat[static_cast<std::size_t>(j)] != y_hat[static_cast<std::size_t>(i)] &&
                   s[static_cast<std::size_t>(j)] == s[static_cast<std::size_t>(i)];
        },
        empty_counter);
}

inline std::vector<std::vector<int>> find_env_neighbors(const Tensor& h, const std::vector<int>& s,
                                                        int k_prime, const std::vector<int>& pool,
                                                        int* empty_counter = nullptr) {
    if (k_prime < 1) throw contract_error("find_env_neighbors: K' must be >= 1");
    return detail::knn_constrained(
        h, k_prime, pool,
        [&](int i, int j) {
            return s[static_cast<std::size_t>(j)] != s[static_cast<std::size_t>(i)];
        },
        empty_counter);
}

// True labels win on training nodes; argmax of logits elsewhere.
// Argmax ties resolve to the lower class.
inline std::vector<int> assign_pseudo_labels(const Tensor& logits,
                                             const std::vector<int>& true_labels,
                                             const std::vector<int>& train_idx) {
    const int n = logits.rows();
    std::vector<int> y_hat(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int j = 1; j < logits.cols(); ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        y_hat[static_cast<std::size_t>(i)] = best;
    }
    for (int i : train_idx) y_hat[static_cast<std::size_t>(i)] = true_labels[static_cast<std::size_t>(i)];
    return y_hat;
}

// Debug dump: node, kind, rank, neighbor, distance.
inline void dump_counterfactual_csv(std::ostream& out, const Tensor& h,
                                    const CounterfactualIndex& idx) {
    out << "node,kind,rank,neighbor,distance\n";
    out.precision(17);
    auto emit = [&](const char* kind, const std::vector<std::vector<int>>& lists) {
        for (std::size_t i = 0; i < lists.size(); ++i)
            for (std::size_t r = 0; r < lists[i].size(); ++r)
                out << i << "," << kind << "," << r << "," << lists[i][r] << ","
                    << detail::sq_l2_rows(h, static_cast<int>(i), lists[i][r]) << "\n";
    };
    emit("env", idx.env_cf);
    emit("content", idx.content_cf);
    emit("env_neighbor", idx.env_neighbors);
}

// Full refresh from the current latent snapshot.
inline CounterfactualIndex build_counterfactual_index(const Tensor& h,
                                                      const std::vector<int>& y_hat,
                                                      const std::vector<int>& s, int k, int k_prime,
                                                      const std::vector<int>& pool) {
    CounterfactualIndex idx;
    idx.env_cf = find_env_counterfactuals(h, y_hat, s, k, pool, &idx.empty_env);
    idx.content_cf = find_content_counterfactuals(h, y_hat, s, k, pool, &idx.empty_content);
    idx.env_neighbors = find_env_neighbors(h, s, k_prime, pool, &idx.empty_env_neighbors);
    return idx;
}

}  // namespace sccaf
