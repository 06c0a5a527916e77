#include "distillbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "distillbench/errors.hpp"
#include "distillbench/io.hpp"
#include "distillbench/numkit.hpp"
#include "distillbench/rng.hpp"

namespace distillbench {

Dataset gen_gaussian_mixture(int classes, int dim, int per_class, double spread,
                             std::uint64_t seed) {
    if (classes < 1 || dim < 1 || per_class < 1) {
        throw InvalidArgument("gen_gaussian_mixture needs classes, dim, per_class >= 1");
    }
    if (spread <= 0.0) {
        throw InvalidArgument("gen_gaussian_mixture needs spread > 0");
    }
    SeededRng rng(seed);
    Matrix means(dim, classes);
    for (int c = 0; c < classes; ++c) {
        double norm2 = 0.0;
        std::vector<double> v(dim);
        for (int r = 0; r < dim; ++r) {
            v[r] = rng.normal();
            norm2 += v[r] * v[r];
        }
        const double norm = std::max(std::sqrt(norm2), kNormEps);
        for (int r = 0; r < dim; ++r) {
            means.at(r, c) = v[r] / norm;
        }
    }
    Dataset ds;
    ds.class_count = classes;
    ds.x = Matrix(dim, classes * per_class);
    ds.labels.resize(static_cast<std::size_t>(classes) * per_class);
    int col = 0;
    for (int c = 0; c < classes; ++c) {
        for (int i = 0; i < per_class; ++i, ++col) {
            for (int r = 0; r < dim; ++r) {
                ds.x.at(r, col) = means.at(r, c) + spread * rng.normal();
            }
            ds.labels[col] = c;
        }
    }
    return ds;
}

Dataset load_csv(const std::string& path, bool has_header) {
    const std::string text = read_text_file(path);
    std::vector<std::string> lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) {
        lines.pop_back();
    }
    std::size_t first = has_header ? 1 : 0;
    if (lines.size() <= first) {
        throw ParseError("csv '" + path + "' contains no data rows");
    }
    int dim = -1;
    std::vector<double> values;
    std::vector<int> labels;
    int n = 0;
    for (std::size_t li = first; li < lines.size(); ++li) {
        const std::string row_context = "row " + std::to_string(li + 1) + " of " + path;
        std::vector<std::string> cells = split(trim(lines[li]), ',');
        if (cells.size() < 2) {
            throw ParseError("need at least one feature and a label at " + row_context);
        }
        const int row_dim = static_cast<int>(cells.size()) - 1;
        if (dim == -1) {
            dim = row_dim;
        } else if (row_dim != dim) {
            throw ParseError("ragged row: expected " + std::to_string(dim + 1) + " cells, got " +
                             std::to_string(cells.size()) + " at " + row_context);
        }
        for (int c = 0; c < dim; ++c) {
            values.push_back(parse_double(trim(cells[c]), row_context));
        }
        const long long label = parse_int(trim(cells.back()), row_context);
        if (label < 0) {
            throw ParseError("negative label at " + row_context);
        }
        labels.push_back(static_cast<int>(label));
        ++n;
    }
    // values are row-major by sample; transpose into columns-as-samples.
    Dataset ds;
    ds.x = Matrix(dim, n);
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < dim; ++r) {
            ds.x.at(r, i) = values[static_cast<std::size_t>(i) * dim + r];
        }
    }
    ds.labels = std::move(labels);
    ds.class_count = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    return ds;
}

std::string dataset_csv(const Dataset& ds) {
    std::ostringstream out;
    for (int i = 0; i < ds.size(); ++i) {
        for (int r = 0; r < ds.dim(); ++r) {
            out << format_double(ds.x.at(r, i)) << ',';
        }
        out << ds.labels[i] << '\n';
    }
    return out.str();
}

void save_csv(const Dataset& ds, const std::string& path) {
    write_text_file(path, dataset_csv(ds));
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw InvalidArgument("split fraction must be in (0, 1), got " +
                              format_double(train_fraction));
    }
    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < ds.size(); ++i) {
        by_class[ds.labels[i]].push_back(i);
    }
    SeededRng rng(seed);
    std::vector<int> train_idx;
    std::vector<int> test_idx;
    for (auto& [label, idx] : by_class) {
        if (idx.size() < 2) {
            throw InvalidArgument("split: class " + std::to_string(label) + " has only " +
                                  std::to_string(idx.size()) + " sample(s), need at least 2");
        }
        rng.shuffle(idx);
        int take = static_cast<int>(std::llround(train_fraction * static_cast<double>(idx.size())));
        take = std::min(std::max(take, 1), static_cast<int>(idx.size()) - 1);
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + take);
        test_idx.insert(test_idx.end(), idx.begin() + take, idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    auto take_subset = [&ds](const std::vector<int>& idx, const std::string& tag) {
        Dataset out;
        out.x = columns(ds.x, idx);
        out.labels.reserve(idx.size());
        for (int i : idx) out.labels.push_back(ds.labels[i]);
        out.class_count = ds.class_count;
        out.split_tag = tag;
        return out;
    };
    return {take_subset(train_idx, "train"), take_subset(test_idx, "test")};
}

} // namespace distillbench
