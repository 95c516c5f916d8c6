#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "sccaf/dataset.hpp"
#include "support/fixtures.hpp"

using namespace sccaf;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("sccaf_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

DatasetMeta toy_meta() {
    DatasetMeta meta;
    meta.name = "toy";
    meta.label_column = "label";
    meta.sensitive_column = "gender";
    meta.sensitive_name = "gender";
    return meta;
}

}  // namespace

TEST_CASE("load_dataset parses a toy fixture") {
    TempDir dir;
    write_file(dir.file("features.csv"),
               "f0,f1,label,gender\n"
               "0.5,1.0,1,0\n"
               "0.1,-1.0,0,1\n"
               "0.2,0.3,,1\n");
    write_file(dir.file("edges.csv"), "src,dst\n0,1\n1,2\n");
    TabularGraphDataset ds = load_dataset(dir.file("features.csv"), dir.file("edges.csv"), toy_meta());
    CHECK(ds.n() == 3);
    CHECK(ds.d() == 2);
    CHECK(ds.labels == std::vector<int>{1, 0, -1});  // empty label cell = unlabeled
    CHECK(ds.sensitive == std::vector<int>{0, 1, 1});
    CHECK(ds.graph.edges().size() == 2);
    for (int s : ds.sensitive) CHECK((s == 0 || s == 1));
}

TEST_CASE("load_dataset error paths") {
    TempDir dir;
    write_file(dir.file("f.csv"), "f0,label,gender\n1,1,0\n2,0,1\n");
    write_file(dir.file("e.csv"), "0,1\n");

    DatasetMeta meta = toy_meta();
    meta.label_column = "missing";
    CHECK_THROWS_AS(load_dataset(dir.file("f.csv"), dir.file("e.csv"), meta), ingest_error);

    write_file(dir.file("bad.csv"), "f0,label,gender\noops,1,0\n2,0,1\n");
    CHECK_THROWS_AS(load_dataset(dir.file("bad.csv"), dir.file("e.csv"), toy_meta()), ingest_error);

    write_file(dir.file("bad_edges.csv"), "0,7\n");
    CHECK_THROWS_AS(load_dataset(dir.file("f.csv"), dir.file("bad_edges.csv"), toy_meta()),
                    ingest_error);
}

TEST_CASE("duplicate edge rows collapse to one graph edge") {
    TempDir dir;
    write_file(dir.file("f.csv"), "f0,label,gender\n1,1,0\n2,0,1\n");
    write_file(dir.file("e.csv"), "0,1\n1,0\n0,1\n");
    TabularGraphDataset ds = load_dataset(dir.file("f.csv"), dir.file("e.csv"), toy_meta());
    CHECK(ds.graph.edges().size() == 1);
}

TEST_CASE("sensitive binarization by threshold") {
    TempDir dir;
    write_file(dir.file("f.csv"), "f0,label,age\n1,1,25\n2,0,40\n3,1,30\n");
    write_file(dir.file("e.csv"), "0,1\n");
    DatasetMeta meta;
    meta.label_column = "label";
    meta.sensitive_column = "age";
    meta.sensitive_name = "age";
    meta.sensitive_threshold = 30.0;
    TabularGraphDataset ds = load_dataset(dir.file("f.csv"), dir.file("e.csv"), meta);
    CHECK(ds.sensitive == std::vector<int>{0, 1, 0});
}

TEST_CASE("load -> save -> load round-trips") {
    TempDir dir;
    TabularGraphDataset ds = testsupport::random_dataset(20, 3, 0.2, 9);
    DatasetMeta meta = toy_meta();
    save_dataset(ds, dir.file("f.csv"), dir.file("e.csv"), meta);
    TabularGraphDataset ds2 = load_dataset(dir.file("f.csv"), dir.file("e.csv"), meta);
    CHECK(ds2.n() == ds.n());
    CHECK(ds2.d() == ds.d());
    CHECK(ds2.labels == ds.labels);
    CHECK(ds2.sensitive == ds.sensitive);
    CHECK(ds2.graph.edges() == ds.graph.edges());
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        CHECK(ds2.features.values()[i] == ds.features.values()[i]);
}

TEST_CASE("standardize_features hand case and zero variance") {
    TabularGraphDataset ds;
    ds.name = "t";
    ds.features = Tensor::frozen(3, 2, {1, 5, 2, 5, 3, 5});
    ds.labels = {0, 1, 1};
    ds.sensitive = {0, 1, 0};
    ds.graph = build_graph(3, {{0, 1}});

    TabularGraphDataset out = standardize_features(ds, {0, 1, 2});
    const double e = std::sqrt(2.0 / 3.0);  // population std of [1,2,3]
    CHECK(out.features.at(0, 0) == Catch::Approx(-1.0 / e));
    CHECK(out.features.at(1, 0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(out.features.at(2, 0) == Catch::Approx(1.0 / e));
    CHECK(out.features.at(0, 0) == Catch::Approx(-1.22474487));
    for (int i = 0; i < 3; ++i) CHECK(out.features.at(i, 1) == 0.0);  // constant column

    // idempotence on train rows
    TabularGraphDataset twice = standardize_features(out, {0, 1, 2});
    for (int i = 0; i < 3; ++i)
        CHECK(twice.features.at(i, 0) == Catch::Approx(out.features.at(i, 0)).margin(1e-9));
}

TEST_CASE("standardization uses no statistics from non-train rows") {
    TabularGraphDataset ds = testsupport::random_dataset(10, 2, 0.3, 4);
    std::vector<int> train = {0, 1, 2, 3, 4};
    TabularGraphDataset a = standardize_features(ds, train);

    // perturb a non-train row; train rows must be unaffected
    std::vector<double> v = ds.features.values();
    v[9 * 2 + 0] += 100.0;
    TabularGraphDataset perturbed = ds;
    perturbed.features = Tensor::frozen(10, 2, v);
    TabularGraphDataset b = standardize_features(perturbed, train);
    for (int i : train)
        for (int j = 0; j < 2; ++j) CHECK(a.features.at(i, j) == b.features.at(i, j));
}

TEST_CASE("make_splits sizes, determinism, and disjointness") {
    TabularGraphDataset ds = testsupport::random_dataset(100, 3, 0.05, 21);
    auto splits = make_splits(ds, 0.5, 0.25, 0.25, {1, 2, 3, 4, 5});
    REQUIRE(splits.size() == 5);
    for (const auto& sp : splits) {
        // sizes within per-stratum rounding of the ratios
        CHECK(std::abs(static_cast<int>(sp.train_idx.size()) - 50) <= 4);
        CHECK(std::abs(static_cast<int>(sp.val_idx.size()) - 25) <= 4);
        CHECK(std::abs(static_cast<int>(sp.test_idx.size()) - 25) <= 4);
        CHECK(sp.train_idx.size() + sp.val_idx.size() + sp.test_idx.size() == 100);

        std::vector<int> all;
        for (int i : sp.train_idx) all.push_back(i);
        for (int i : sp.val_idx) all.push_back(i);
        for (int i : sp.test_idx) all.push_back(i);
        std::sort(all.begin(), all.end());
        CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    }
    auto again = make_split(ds, 0.5, 0.25, 0.25, 1);
    CHECK(again.train_idx == splits[0].train_idx);
    CHECK(again.val_idx == splits[0].val_idx);
    CHECK(again.test_idx == splits[0].test_idx);
}

TEST_CASE("splits preserve the positive-label fraction") {
    TabularGraphDataset ds = testsupport::random_dataset(1000, 3, 0.005, 33);
    double global_pos = 0;
    for (int y : ds.labels) global_pos += y;
    global_pos /= 1000.0;

    auto sp = make_split(ds, 0.5, 0.25, 0.25, 7);
    for (const auto* part : {&sp.train_idx, &sp.val_idx, &sp.test_idx}) {
        double pos = 0;
        for (int i : *part) pos += ds.labels[static_cast<std::size_t>(i)];
        pos /= static_cast<double>(part->size());
        CHECK(std::abs(pos - global_pos) < 0.05);
    }
}

TEST_CASE("a stratum too small to fill all parts is an error") {
    TabularGraphDataset ds = testsupport::random_dataset(20, 2, 0.2, 8);
    // collapse stratum (1,1) to a single member
    for (int i = 0; i < 20; ++i)
        if (ds.labels[static_cast<std::size_t>(i)] == 1 && ds.sensitive[static_cast<std::size_t>(i)] == 1 && i != 9) {
            ds.labels[static_cast<std::size_t>(i)] = 0;
        }
    ds.labels[9] = 1;
    ds.sensitive[9] = 1;
    CHECK_THROWS_AS(make_split(ds, 0.5, 0.25, 0.25, 3), split_error);
}
