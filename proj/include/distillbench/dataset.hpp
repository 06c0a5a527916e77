#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "distillbench/matrix.hpp"

namespace distillbench {

/// Columns of x are samples; labels[i] belongs to column i.
struct Dataset {
    Matrix x;                // d0 x n
    std::vector<int> labels; // values in [0, class_count)
    int class_count = 0;
    std::string split_tag;

    int dim() const { return x.rows(); }
    int size() const { return x.cols(); }
};

/// Class means i.i.d. on the unit sphere; samples are mean + spread * N(0, I).
/// Samples are ordered class-major (all of class 0 first).
Dataset gen_gaussian_mixture(int classes, int dim, int per_class, double spread,
                             std::uint64_t seed);

/// Rows are samples, the last column is an integer label. Errors carry the
/// 1-based row number of the offending line.
Dataset load_csv(const std::string& path, bool has_header);

std::string dataset_csv(const Dataset& ds);
void save_csv(const Dataset& ds, const std::string& path);

/// Stratified by class: per class, round(fraction * count) samples go to the
/// train side after a seeded shuffle. Disjoint and exhaustive.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

} // namespace distillbench
