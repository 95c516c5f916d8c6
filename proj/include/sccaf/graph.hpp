#pragma once

// Undirected unweighted graph storage, GCN symmetric normalization, and
// seeded negative-edge sampling for the link-reconstruction loss.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sccaf/common.hpp"
#include "sccaf/tensor.hpp"

namespace sccaf {

using Edge = std::pair<int, int>;

class Graph {
  public:
    Graph() = default;
    Graph(int n, std::vector<Edge> canonical_edges)
        : n_(n), edges_(std::move(canonical_edges)) {
        edge_keys_.reserve(edges_.size());
        for (const Edge& e : edges_) edge_keys_.insert(key(e.first, e.second));
        degrees_.assign(static_cast<std::size_t>(n_), 0);
        for (const Edge& e : edges_) {
            ++degrees_[static_cast<std::size_t>(e.first)];
            ++degrees_[static_cast<std::size_t>(e.second)];
        }
    }

    int n() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& degrees() const { return degrees_; }

    bool has_edge(int i, int j) const {
        if (i == j) return false;
        return edge_keys_.count(key(std::min(i, j), std::max(i, j))) > 0;
    }

    std::size_t non_edge_count() const {
        const std::size_t all = static_cast<std::size_t>(n_) * (n_ - 1) / 2;
        return all - edges_.size();
    }

  private:
    static std::uint64_t key(int lo, int hi) {
        return (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint32_t>(hi);
    }

    int n_ = 0;
    std::vector<Edge> edges_;  // canonical (lo, hi), sorted, unique
    std::unordered_set<std::uint64_t> edge_keys_;
    std::vector<int> degrees_;
};

// Deduplicates mirrored and repeated pairs; rejects self-loops and
// out-of-range endpoints.
inline Graph build_graph(int n, const std::vector<Edge>& edge_list) {
    if (n < 0) throw ingest_error("build_graph: negative node count");
    std::vector<Edge> canon;
    canon.reserve(edge_list.size());
    std::string bad_self;
    for (const Edge& e : edge_list) {
        if (e.first < 0 || e.first >= n || e.second < 0 || e.second >= n)
            throw ingest_error("build_graph: edge (" + std::to_string(e.first) + ", " +
                               std::to_string(e.second) + ") references a node outside [0, " +
                               std::to_string(n) + ")");
        if (e.first == e.second) {
            bad_self += " (" + std::to_string(e.first) + ", " + std::to_string(e.second) + ")";
            continue;
        }
        canon.emplace_back(std::min(e.first, e.second), std::max(e.first, e.second));
    }
    if (!bad_self.empty()) throw ingest_error("build_graph: self-loops in input:" + bad_self);
    std::sort(canon.begin(), canon.end());
    canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
    return Graph(n, std::move(canon));
}

// GCN propagation matrix: A~ = A + I, D~ = diag(rowsum A~),
// A^ = D~^{-1/2} A~ D~^{-1/2}. Dense, frozen, exactly symmetric.
inline Tensor sym_normalize(const Graph& g) {
    const int n = g.n();
    std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        inv_sqrt_deg[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(g.degrees()[i] + 1.0);
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        a[static_cast<std::size_t>(i) * n + i] =
            inv_sqrt_deg[static_cast<std::size_t>(i)] * inv_sqrt_deg[static_cast<std::size_t>(i)];
    for (const Edge& e : g.edges()) {
        const double v = inv_sqrt_deg[static_cast<std::size_t>(e.first)] *
                         inv_sqrt_deg[static_cast<std::size_t>(e.second)];
        a[static_cast<std::size_t>(e.first) * n + e.second] = v;
        a[static_cast<std::size_t>(e.second) * n + e.first] = v;
    }
    return Tensor::frozen(n, n, std::move(a));
}

// Uniform sample without replacement among unordered non-edge pairs.
// Deterministic for a fixed seed. Rejection sampling with dedup; falls back
// to full enumeration when the pool is mostly exhausted.
inline std::vector<Edge> sample_negative_edges(const Graph& g, std::size_t count,
                                               std::uint64_t seed) {
    const std::size_t pool = g.non_edge_count();
    if (count > pool)
        throw sampling_error("sample_negative_edges: requested " + std::to_string(count) +
                             " but only " + std::to_string(pool) + " non-edges exist");
    if (count == 0) return {};
    std::mt19937_64 rng(seed);
    const int n = g.n();

    if (count * 2 >= pool) {
        // Dense regime: enumerate the pool and shuffle.
        std::vector<Edge> all;
        all.reserve(pool);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (!g.has_edge(i, j)) all.emplace_back(i, j);
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(count);
        return all;
    }

    std::unordered_set<std::uint64_t> seen;
    std::vector<Edge> out;
    out.reserve(count);
    std::uniform_int_distribution<int> pick(0, n - 1);
    while (out.size() < count) {
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        const int lo = std::min(i, j), hi = std::max(i, j);
        if (g.has_edge(lo, hi)) continue;
        const std::uint64_t k = (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint32_t>(hi);
        if (!seen.insert(k).second) continue;
        out.emplace_back(lo, hi);
    }
    return out;
}

}  // namespace sccaf
