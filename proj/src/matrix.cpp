#include "distillbench/matrix.hpp"

#include <cmath>

#include "distillbench/errors.hpp"

namespace distillbench {

namespace {

void require_positive_dims(int rows, int cols) {
    if (rows < 1 || cols < 1) {
        throw InvalidArgument("matrix dimensions must be >= 1, got " + std::to_string(rows) +
                              "x" + std::to_string(cols));
    }
}

} // namespace

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    require_positive_dims(rows, cols);
    data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require_positive_dims(rows, cols);
    if (data_.size() != static_cast<std::size_t>(rows) * cols) {
        throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str());
    }
    require_finite(*this, "matrix construction");
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul shape mismatch: " + a.shape_str() + " * " + b.shape_str());
    }
    Matrix out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.cols(); ++k) {
                acc += a.at(i, k) * b.at(k, j);
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            out.at(j, i) = m.at(i, j);
        }
    }
    return out;
}

Matrix identity(int n) {
    Matrix out(n, n);
    for (int i = 0; i < n; ++i) {
        out.at(i, i) = 1.0;
    }
    return out;
}

Matrix scaled_add(const Matrix& a, double s, const Matrix& b) {
    Matrix out = a;
    add_scaled_inplace(out, s, b);
    return out;
}

void add_scaled_inplace(Matrix& a, double s, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw DimensionError("shape mismatch in add: " + a.shape_str() + " vs " + b.shape_str());
    }
    double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[i] += s * pb[i];
    }
}

Matrix scale(const Matrix& a, double s) {
    Matrix out = a;
    double* p = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        p[i] *= s;
    }
    return out;
}

Matrix column(const Matrix& m, int c) {
    if (c < 0 || c >= m.cols()) {
        throw InvalidArgument("column index " + std::to_string(c) + " out of range for " +
                              m.shape_str());
    }
    Matrix out(m.rows(), 1);
    for (int r = 0; r < m.rows(); ++r) {
        out.at(r, 0) = m.at(r, c);
    }
    return out;
}

Matrix columns(const Matrix& m, const std::vector<int>& idx) {
    if (idx.empty()) {
        throw InvalidArgument("column selection must be non-empty");
    }
    Matrix out(m.rows(), static_cast<int>(idx.size()));
    for (int j = 0; j < static_cast<int>(idx.size()); ++j) {
        int c = idx[j];
        if (c < 0 || c >= m.cols()) {
            throw InvalidArgument("column index " + std::to_string(c) + " out of range for " +
                                  m.shape_str());
        }
        for (int r = 0; r < m.rows(); ++r) {
            out.at(r, j) = m.at(r, c);
        }
    }
    return out;
}

std::vector<double> row_sums(const Matrix& m) {
    std::vector<double> sums(m.rows(), 0.0);
    for (int r = 0; r < m.rows(); ++r) {
        double acc = 0.0;
        for (int c = 0; c < m.cols(); ++c) {
            acc += m.at(r, c);
        }
        sums[r] = acc;
    }
    return sums;
}

double max_abs(const Matrix& m) {
    double best = 0.0;
    const double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
        best = std::max(best, std::fabs(p[i]));
    }
    return best;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw DimensionError("shape mismatch in diff: " + a.shape_str() + " vs " + b.shape_str());
    }
    double best = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        best = std::max(best, std::fabs(pa[i] - pb[i]));
    }
    return best;
}

double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    const double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
        acc += p[i] * p[i];
    }
    return std::sqrt(acc);
}

bool all_finite(const Matrix& m) {
    const double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!std::isfinite(p[i])) {
            return false;
        }
    }
    return true;
}

void require_finite(const Matrix& m, const std::string& context) {
    if (!all_finite(m)) {
        throw NumericError("non-finite matrix entry in " + context);
    }
}

} // namespace distillbench
