#pragma once

// Node-classification quality (AUC, F1) and prediction-level group fairness
// (statistical parity gap, equal opportunity gap). All values reported as
// percentages.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sccaf/common.hpp"

namespace sccaf {

struct EvalReport {
    double auc = 0.0;
    double f1 = 0.0;
    double delta_sp = 0.0;
    double delta_eo = 0.0;
    // counts indexed [s][y][y_hat]
    std::array<std::array<std::array<int, 2>, 2>, 2> group_counts{};
};

// Mann-Whitney AUC: average ranks handle ties with 0.5 credit.
inline double auc(const std::vector<double>& scores, const std::vector<int>& y,
                  const std::vector<int>& idx) {
    std::size_t pos = 0, neg = 0;
    for (int i : idx) (y[static_cast<std::size_t>(i)] == 1 ? pos : neg) += 1;
    if (pos == 0 || neg == 0) throw metric_error("auc: index set contains a single class");

    std::vector<std::pair<double, int>> items;
    items.reserve(idx.size());
    for (int i : idx)
        items.emplace_back(scores[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(i)]);
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double rank_sum_pos = 0.0;
    std::size_t r = 0;
    while (r < items.size()) {
        std::size_t r2 = r;
        while (r2 + 1 < items.size() && items[r2 + 1].first == items[r].first) ++r2;
        const double avg_rank = (static_cast<double>(r) + static_cast<double>(r2)) / 2.0 + 1.0;
        for (std::size_t q = r; q <= r2; ++q)
            if (items[q].second == 1) rank_sum_pos += avg_rank;
        r = r2 + 1;
    }
    const double u = rank_sum_pos - static_cast<double>(pos) * (pos + 1) / 2.0;
    return 100.0 * u / (static_cast<double>(pos) * static_cast<double>(neg));
}

// Binary F1, positive class 1; 0 when precision + recall is 0.
inline double f1(const std::vector<int>& y_hat, const std::vector<int>& y,
                 const std::vector<int>& idx) {
    if (idx.empty()) throw metric_error("f1: empty index set");
    int tp = 0, fp = 0, fn = 0;
    for (int i : idx) {
        const int p = y_hat[static_cast<std::size_t>(i)], t = y[static_cast<std::size_t>(i)];
        if (p == 1 && t == 1) ++tp;
        else if (p == 1 && t == 0) ++fp;
        else if (p == 0 && t == 1) ++fn;
    }
    if (2 * tp + fp + fn == 0) return 0.0;
    return 100.0 * 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

// |P(y_hat=1 | s=0) - P(y_hat=1 | s=1)| x 100.
inline double statistical_parity(const std::vector<int>& y_hat, const std::vector<int>& s,
                                 const std::vector<int>& idx) {
    int n0 = 0, n1 = 0, p0 = 0, p1 = 0;
    for (int i : idx) {
        if (s[static_cast<std::size_t>(i)] == 0) {
            ++n0;
            p0 += y_hat[static_cast<std::size_t>(i)] == 1;
        } else {
            ++n1;
            p1 += y_hat[static_cast<std::size_t>(i)] == 1;
        }
    }
    if (n0 == 0 || n1 == 0) throw metric_error("statistical_parity: a sensitive group is absent");
    return 100.0 * std::abs(static_cast<double>(p0) / n0 - static_cast<double>(p1) / n1);
}

// |P(y_hat=1 | y=1, s=0) - P(y_hat=1 | y=1, s=1)| x 100.
inline double equal_opportunity(const std::vector<int>& y_hat, const std::vector<int>& y,
                                const std::vector<int>& s, const std::vector<int>& idx) {
    int n0 = 0, n1 = 0, p0 = 0, p1 = 0;
    for (int i : idx) {
        if (y[static_cast<std::size_t>(i)] != 1) continue;
        if (s[static_cast<std::size_t>(i)] == 0) {
            ++n0;
            p0 += y_hat[static_cast<std::size_t>(i)] == 1;
        } else {
            ++n1;
            p1 += y_hat[static_cast<std::size_t>(i)] == 1;
        }
    }
    if (n0 == 0)
        throw metric_error("equal_opportunity: group s=0 has no positive-label nodes");
    if (n1 == 0)
        throw metric_error("equal_opportunity: group s=1 has no positive-label nodes");
    return 100.0 * std::abs(static_cast<double>(p0) / n0 - static_cast<double>(p1) / n1);
}

inline EvalReport evaluate(const std::vector<double>& scores, const std::vector<int>& y_hat,
                           const std::vector<int>& y, const std::vector<int>& s,
                           const std::vector<int>& idx) {
    EvalReport rep;
    rep.auc = auc(scores, y, idx);
    rep.f1 = f1(y_hat, y, idx);
    rep.delta_sp = statistical_parity(y_hat, s, idx);
    rep.delta_eo = equal_opportunity(y_hat, y, s, idx);
    for (int i : idx)
        ++rep.group_counts[static_cast<std::size_t>(s[static_cast<std::size_t>(i)])]
                          [static_cast<std::size_t>(y[static_cast<std::size_t>(i)])]
                          [static_cast<std::size_t>(y_hat[static_cast<std::size_t>(i)])];
    return rep;
}

}  // namespace sccaf
