#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace distillbench {

/// Dense row-major matrix of 64-bit reals; the only numeric carrier.
/// Columns are examples everywhere features or logits are batched.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols); // zero-filled
    Matrix(int rows, int cols, std::vector<double> data);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::string shape_str() const; // "3x4"
    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Standard product with a fixed scalar accumulation order (i, j, k loops),
// so results are bit-reproducible. Throws DimensionError naming both shapes.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

Matrix identity(int n);

// out = a + s * b; shapes must match.
Matrix scaled_add(const Matrix& a, double s, const Matrix& b);
void add_scaled_inplace(Matrix& a, double s, const Matrix& b);
Matrix scale(const Matrix& a, double s);

Matrix column(const Matrix& m, int c);               // as a rows x 1 matrix
Matrix columns(const Matrix& m, const std::vector<int>& idx);

std::vector<double> row_sums(const Matrix& m);

double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b); // shapes must match
double frobenius_norm(const Matrix& m);

bool all_finite(const Matrix& m);
void require_finite(const Matrix& m, const std::string& context);

} // namespace distillbench
