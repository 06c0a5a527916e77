#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "distillbench/dataset.hpp"
#include "distillbench/errors.hpp"
#include "distillbench/io.hpp"

using namespace distillbench;

namespace {

// Nearest-class-mean classifier accuracy, the baseline oracle.
double nearest_mean_accuracy(const Dataset& ds) {
    Matrix means(ds.dim(), ds.class_count);
    std::vector<int> counts(ds.class_count, 0);
    for (int i = 0; i < ds.size(); ++i) {
        counts[ds.labels[i]]++;
        for (int r = 0; r < ds.dim(); ++r) {
            means.at(r, ds.labels[i]) += ds.x.at(r, i);
        }
    }
    for (int c = 0; c < ds.class_count; ++c) {
        for (int r = 0; r < ds.dim(); ++r) means.at(r, c) /= counts[c];
    }
    int correct = 0;
    for (int i = 0; i < ds.size(); ++i) {
        int best = 0;
        double best_d = 1e300;
        for (int c = 0; c < ds.class_count; ++c) {
            double d = 0.0;
            for (int r = 0; r < ds.dim(); ++r) {
                const double diff = ds.x.at(r, i) - means.at(r, c);
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        if (best == ds.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / ds.size();
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("gen_gaussian_mixture: vanishing spread is perfectly separable") {
    Dataset ds = gen_gaussian_mixture(4, 6, 20, 1e-6, 3);
    CHECK(nearest_mean_accuracy(ds) == 1.0);
}

TEST_CASE("gen_gaussian_mixture is deterministic per seed") {
    Dataset a = gen_gaussian_mixture(3, 5, 10, 0.4, 9);
    Dataset b = gen_gaussian_mixture(3, 5, 10, 0.4, 9);
    CHECK(a.x == b.x);
    CHECK(a.labels == b.labels);
    Dataset c = gen_gaussian_mixture(3, 5, 10, 0.4, 10);
    CHECK(max_abs_diff(a.x, c.x) > 0.0);
}

TEST_CASE("gen_gaussian_mixture: the default recipe beats 0.9 nearest-mean accuracy") {
    Dataset ds = gen_gaussian_mixture(10, 16, 200, 0.3, 1);
    CHECK(ds.size() == 2000);
    CHECK(nearest_mean_accuracy(ds) >= 0.9);
}

TEST_CASE("load_csv parses a hand-written file exactly") {
    const std::string path = temp_path("db_test_data.csv");
    write_text_file(path, "1.5,-2,0\n0.25,3.5,1\n-1,0.125,2\n");
    Dataset ds = load_csv(path, false);
    CHECK(ds.dim() == 2);
    CHECK(ds.size() == 3);
    CHECK(ds.class_count == 3);
    CHECK(ds.x.at(0, 0) == 1.5);
    CHECK(ds.x.at(1, 0) == -2.0);
    CHECK(ds.x.at(0, 2) == -1.0);
    CHECK(ds.x.at(1, 2) == 0.125);
    CHECK(ds.labels == std::vector<int>{0, 1, 2});
    std::remove(path.c_str());
}

TEST_CASE("load_csv skips a header when told to") {
    const std::string path = temp_path("db_test_header.csv");
    write_text_file(path, "x0,x1,label\n1,2,0\n3,4,1\n");
    Dataset ds = load_csv(path, true);
    CHECK(ds.size() == 2);
    CHECK_THROWS_AS(load_csv(path, false), ParseError); // header cells are not numbers
    std::remove(path.c_str());
}

TEST_CASE("load_csv reports the offending row") {
    const std::string path = temp_path("db_test_bad.csv");
    write_text_file(path, "1,2,0\n1,2,3,1\n");
    CHECK_THROWS_WITH_AS(load_csv(path, false), doctest::Contains("row 2"), ParseError);
    write_text_file(path, "1,2,0\n1,oops,1\n");
    CHECK_THROWS_WITH_AS(load_csv(path, false), doctest::Contains("row 2"), ParseError);
    write_text_file(path, "1,2,-1\n");
    CHECK_THROWS_AS(load_csv(path, false), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("dataset csv round-trips exactly") {
    Dataset ds = gen_gaussian_mixture(3, 4, 5, 0.5, 21);
    const std::string path = temp_path("db_test_roundtrip.csv");
    save_csv(ds, path);
    Dataset back = load_csv(path, false);
    CHECK(back.x == ds.x);
    CHECK(back.labels == ds.labels);
    std::remove(path.c_str());
}

TEST_CASE("split is stratified, disjoint, exhaustive, and deterministic") {
    Dataset ds = gen_gaussian_mixture(4, 3, 10, 0.5, 5);
    auto [train_set, test_set] = split(ds, 0.5, 7);
    CHECK(train_set.size() == 20);
    CHECK(test_set.size() == 20);
    std::map<int, int> train_counts;
    for (int l : train_set.labels) train_counts[l]++;
    for (const auto& [label, count] : train_counts) CHECK(count == 5);

    // Union of the split is the original multiset of samples.
    std::vector<std::vector<double>> original, recombined;
    for (int i = 0; i < ds.size(); ++i) {
        std::vector<double> col(ds.dim());
        for (int r = 0; r < ds.dim(); ++r) col[r] = ds.x.at(r, i);
        col.push_back(ds.labels[i]);
        original.push_back(std::move(col));
    }
    for (const Dataset* part : {&train_set, &test_set}) {
        for (int i = 0; i < part->size(); ++i) {
            std::vector<double> col(part->dim());
            for (int r = 0; r < part->dim(); ++r) col[r] = part->x.at(r, i);
            col.push_back(part->labels[i]);
            recombined.push_back(std::move(col));
        }
    }
    std::sort(original.begin(), original.end());
    std::sort(recombined.begin(), recombined.end());
    CHECK(original == recombined);

    auto [train2, test2] = split(ds, 0.5, 7);
    CHECK(train2.x == train_set.x);
    CHECK(train2.labels == train_set.labels);
}

TEST_CASE("split keeps per-class counts within one of the fraction") {
    Dataset ds = gen_gaussian_mixture(3, 2, 7, 0.5, 11);
    auto [train_set, test_set] = split(ds, 0.6, 13);
    std::map<int, int> counts;
    for (int l : train_set.labels) counts[l]++;
    for (const auto& [label, count] : counts) {
        CHECK(std::fabs(count - 0.6 * 7) <= 1.0);
    }
    CHECK(train_set.split_tag == "train");
    CHECK(test_set.split_tag == "test");
}

TEST_CASE("split rejects undersized classes and bad fractions") {
    Dataset ds;
    ds.x = Matrix(2, 3, {1, 2, 3, 4, 5, 6});
    ds.labels = {0, 0, 1};
    ds.class_count = 2;
    CHECK_THROWS_WITH_AS(split(ds, 0.5, 1), doctest::Contains("class 1"), InvalidArgument);
    Dataset ok = gen_gaussian_mixture(2, 2, 4, 0.5, 1);
    CHECK_THROWS_AS(split(ok, 0.0, 1), InvalidArgument);
    CHECK_THROWS_AS(split(ok, 1.0, 1), InvalidArgument);
}
