#pragma once

// Tabular-graph dataset ingest: features.csv + edges.csv loading, per-column
// standardization on train statistics, and stratified seeded splits.
//
// features.csv: header row, one row per node. Columns are numeric features
// plus a named label column and a named sensitive column. An empty label
// cell marks an unlabeled node. edges.csv: two integer columns, 0-based;
// a non-numeric first row is treated as a header and skipped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sccaf/common.hpp"
#include "sccaf/graph.hpp"
#include "sccaf/tensor.hpp"

namespace sccaf {

struct DatasetMeta {
    std::string name = "dataset";
    std::string label_column;
    std::string sensitive_column;
    std::string sensitive_name;
    // When set, the raw sensitive value is binarized as (value > threshold).
    std::optional<double> sensitive_threshold;
};

struct TabularGraphDataset {
    std::string name;
    Tensor features;              // n x d, frozen
    std::vector<int> labels;      // -1 = unlabeled
    std::vector<int> sensitive;   // fully observed, {0, 1}
    Graph graph;
    std::string sensitive_name;

    int n() const { return features.rows(); }
    int d() const { return features.cols(); }

    std::vector<int> labeled_indices() const {
        std::vector<int> idx;
        for (int i = 0; i < n(); ++i)
            if (labels[static_cast<std::size_t>(i)] >= 0) idx.push_back(i);
        return idx;
    }
};

struct SplitAssignment {
    std::vector<int> train_idx, val_idx, test_idx;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim whitespace and CR
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stod(s, &pos);
    } catch (...) {
        return false;
    }
    return pos == s.size();
}

}  // namespace detail

inline TabularGraphDataset load_dataset(const std::string& features_path,
                                        const std::string& edges_path, const DatasetMeta& meta) {
    std::ifstream fin(features_path);
    if (!fin) throw ingest_error("load_dataset: cannot open " + features_path);
    std::string line;
    if (!std::getline(fin, line)) throw ingest_error("load_dataset: empty features file");
    const std::vector<std::string> header = detail::split_csv_line(line);

    int label_col = -1, sens_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == meta.label_column) label_col = static_cast<int>(j);
        if (header[j] == meta.sensitive_column) sens_col = static_cast<int>(j);
    }
    if (label_col < 0) throw ingest_error("load_dataset: missing label column '" + meta.label_column + "'");
    if (sens_col < 0)
        throw ingest_error("load_dataset: missing sensitive column '" + meta.sensitive_column + "'");

    std::vector<double> feat;
    std::vector<int> labels, sensitive;
    int row = 0;
    while (std::getline(fin, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw ingest_error("load_dataset: row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(header.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double v = 0.0;
            if (static_cast<int>(j) == label_col) {
                if (cells[j].empty()) {
                    labels.push_back(-1);
                } else if (detail::parse_double(cells[j], v)) {
                    labels.push_back(v != 0.0 ? 1 : 0);
                } else {
                    throw ingest_error("load_dataset: non-numeric label at row " +
                                       std::to_string(row));
                }
            } else if (static_cast<int>(j) == sens_col) {
                if (!detail::parse_double(cells[j], v))
                    throw ingest_error("load_dataset: non-numeric sensitive value at row " +
                                       std::to_string(row));
                if (meta.sensitive_threshold)
                    sensitive.push_back(v > *meta.sensitive_threshold ? 1 : 0);
                else
                    sensitive.push_back(v != 0.0 ? 1 : 0);
            } else {
                if (!detail::parse_double(cells[j], v))
                    throw ingest_error("load_dataset: non-numeric feature at row " +
                                       std::to_string(row) + ", column '" + header[j] + "'");
                feat.push_back(v);
            }
        }
        ++row;
    }
    const int n = row;
    const int d = static_cast<int>(header.size()) - 2;
    if (n == 0) throw ingest_error("load_dataset: no data rows in " + features_path);

    std::ifstream ein(edges_path);
    if (!ein) throw ingest_error("load_dataset: cannot open " + edges_path);
    std::vector<Edge> edges;
    bool first = true;
    while (std::getline(ein, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() < 2) throw ingest_error("load_dataset: malformed edge row '" + line + "'");
        double a = 0.0, b = 0.0;
        const bool numeric = detail::parse_double(cells[0], a) && detail::parse_double(cells[1], b);
        if (!numeric) {
            if (first) {
                first = false;
                continue;  // header row
            }
            throw ingest_error("load_dataset: non-numeric edge row '" + line + "'");
        }
        first = false;
        const int i = static_cast<int>(a), j = static_cast<int>(b);
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw ingest_error("load_dataset: edge (" + std::to_string(i) + ", " +
                               std::to_string(j) + ") references a node beyond the " +
                               std::to_string(n) + " feature rows");
        edges.emplace_back(i, j);
    }

    TabularGraphDataset ds;
    ds.name = meta.name;
    ds.features = Tensor::frozen(n, d, std::move(feat));
    ds.labels = std::move(labels);
    ds.sensitive = std::move(sensitive);
    ds.graph = build_graph(n, edges);
    ds.sensitive_name = meta.sensitive_name;

    bool s0 = false, s1 = false;
    for (int s : ds.sensitive) (s == 0 ? s0 : s1) = true;
    if (!s0 || !s1) throw ingest_error("load_dataset: a sensitive group is empty");
    return ds;
}

// Writes the dataset back out in the same two-file format, losslessly.
inline void save_dataset(const TabularGraphDataset& ds, const std::string& features_path,
                         const std::string& edges_path, const DatasetMeta& meta) {
    std::ofstream fout(features_path);
    if (!fout) throw ingest_error("save_dataset: cannot write " + features_path);
    fout.precision(17);
    for (int j = 0; j < ds.d(); ++j) fout << "f" << j << ",";
    fout << meta.label_column << "," << meta.sensitive_column << "\n";
    for (int i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.d(); ++j) fout << ds.features.at(i, j) << ",";
        if (ds.labels[static_cast<std::size_t>(i)] >= 0) fout << ds.labels[static_cast<std::size_t>(i)];
        fout << "," << ds.sensitive[static_cast<std::size_t>(i)] << "\n";
    }
    std::ofstream eout(edges_path);
    if (!eout) throw ingest_error("save_dataset: cannot write " + edges_path);
    eout << "src,dst\n";
    for (const Edge& e : ds.graph.edges()) eout << e.first << "," << e.second << "\n";
}

// Z-scores every feature column using statistics of the train rows only
// (population standard deviation). Zero-variance columns become all-zeros.
inline TabularGraphDataset standardize_features(const TabularGraphDataset& ds,
                                                const std::vector<int>& train_idx) {
    if (train_idx.empty()) throw contract_error("standardize_features: empty train index");
    const int n = ds.n(), d = ds.d();
    std::vector<double> out(ds.features.values());
    for (int j = 0; j < d; ++j) {
        double m = 0.0;
        for (int i : train_idx) m += ds.features.at(i, j);
        m /= static_cast<double>(train_idx.size());
        double var = 0.0;
        for (int i : train_idx) {
            const double c = ds.features.at(i, j) - m;
            var += c * c;
        }
        var /= static_cast<double>(train_idx.size());
        const double sd = std::sqrt(var);
        for (int i = 0; i < n; ++i) {
            double& cell = out[static_cast<std::size_t>(i) * d + j];
            cell = sd > kEps ? (cell - m) / sd : 0.0;
        }
    }
    TabularGraphDataset result = ds;
    result.features = Tensor::frozen(n, d, std::move(out));
    return result;
}

// Stratified splits over labeled nodes, joint strata (label x sensitive).
// Largest-remainder rounding within each stratum; deterministic per seed.
inline SplitAssignment make_split(const TabularGraphDataset& ds, double train_ratio,
                                  double val_ratio, double test_ratio, std::uint64_t seed) {
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw contract_error("make_split: ratios must sum to 1");
    std::map<std::pair<int, int>, std::vector<int>> strata;
    for (int i = 0; i < ds.n(); ++i) {
        const int y = ds.labels[static_cast<std::size_t>(i)];
        if (y < 0) continue;
        strata[{y, ds.sensitive[static_cast<std::size_t>(i)]}].push_back(i);
    }
    SplitAssignment split;
    split.seed = seed;
    std::mt19937_64 rng(seed);
    for (auto& [key, members] : strata) {
        if (members.size() < 3)
            throw split_error("make_split: stratum (label=" + std::to_string(key.first) +
                              ", sensitive=" + std::to_string(key.second) + ") has only " +
                              std::to_string(members.size()) + " nodes; cannot fill all parts");
        std::shuffle(members.begin(), members.end(), rng);
        const double sz = static_cast<double>(members.size());
        std::size_t n_train = static_cast<std::size_t>(std::floor(train_ratio * sz));
        std::size_t n_val = static_cast<std::size_t>(std::floor(val_ratio * sz));
        std::size_t n_test = static_cast<std::size_t>(std::floor(test_ratio * sz));
        // distribute the rounding remainder by largest fractional part
        std::vector<std::pair<double, int>> frac = {
            {train_ratio * sz - std::floor(train_ratio * sz), 0},
            {val_ratio * sz - std::floor(val_ratio * sz), 1},
            {test_ratio * sz - std::floor(test_ratio * sz), 2}};
        std::stable_sort(frac.begin(), frac.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        std::size_t rem = members.size() - n_train - n_val - n_test;
        for (std::size_t r = 0; r < rem; ++r) {
            const int part = frac[r % 3].second;
            if (part == 0) ++n_train;
            else if (part == 1) ++n_val;
            else ++n_test;
        }
        if (n_train == 0) { --(n_val > n_test ? n_val : n_test); ++n_train; }
        if (n_val == 0) { --(n_train > n_test ? n_train : n_test); ++n_val; }
        if (n_test == 0) { --(n_train > n_val ? n_train : n_val); ++n_test; }
        std::size_t p = 0;
        for (std::size_t r = 0; r < n_train; ++r) split.train_idx.push_back(members[p++]);
        for (std::size_t r = 0; r < n_val; ++r) split.val_idx.push_back(members[p++]);
        for (std::size_t r = 0; r < n_test; ++r) split.test_idx.push_back(members[p++]);
    }
    std::sort(split.train_idx.begin(), split.train_idx.end());
    std::sort(split.val_idx.begin(), split.val_idx.end());
    std::sort(split.test_idx.begin(), split.test_idx.end());

    auto check_part = [&](const std::vector<int>& part, const char* name) {
        bool y0 = false, y1 = false, s0 = false, s1 = false;
        for (int i : part) {
            (ds.labels[static_cast<std::size_t>(i)] == 1 ? y1 : y0) = true;
            (ds.sensitive[static_cast<std::size_t>(i)] == 1 ? s1 : s0) = true;
        }
        if (!(y0 && y1 && s0 && s1))
            throw split_error(std::string("make_split: part '") + name +
                              "' is missing a label value or sensitive group");
    };
    check_part(split.train_idx, "train");
    check_part(split.val_idx, "val");
    check_part(split.test_idx, "test");
    return split;
}

inline std::vector<SplitAssignment> make_splits(const TabularGraphDataset& ds, double train_ratio,
                                                double val_ratio, double test_ratio,
                                                const std::vector<std::uint64_t>& seeds) {
    if (seeds.size() < 1) throw contract_error("make_splits: at least one seed required");
    std::vector<SplitAssignment> splits;
    splits.reserve(seeds.size());
    for (std::uint64_t s : seeds)
        splits.push_back(make_split(ds, train_ratio, val_ratio, test_ratio, s));
    return splits;
}

}  // namespace sccaf
