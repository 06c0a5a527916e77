// Test-only reference implementations, kept independent of the library code
// paths they check: different loop orders, explicit centering matrices, and
// direct formula evaluation.
#pragma once

#include <cmath>
#include <vector>

#include "distillbench/matrix.hpp"
#include "distillbench/rng.hpp"

namespace oracles {

using distillbench::Matrix;

// k-outer accumulation order, unlike the library's i,j,k scalar loop.
inline Matrix matmul_triple_loop(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (int k = 0; k < a.cols(); ++k) {
        for (int i = 0; i < a.rows(); ++i) {
            for (int j = 0; j < b.cols(); ++j) {
                out.at(i, j) += a.at(i, k) * b.at(k, j);
            }
        }
    }
    return out;
}

// Direct exp ratio, no max subtraction (fine for moderate logits).
inline std::vector<double> softmax_direct(const std::vector<double>& logits, double mu) {
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] / mu);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

inline double cosine(const Matrix& a, int col_a, const Matrix& b, int col_b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int r = 0; r < a.rows(); ++r) {
        dot += a.at(r, col_a) * b.at(r, col_b);
        na += a.at(r, col_a) * a.at(r, col_a);
        nb += b.at(r, col_b) * b.at(r, col_b);
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline Matrix random_matrix(int rows, int cols, distillbench::SeededRng& rng, double lo = -1.0,
                            double hi = 1.0) {
    Matrix out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            out.at(r, c) = rng.uniform(lo, hi);
        }
    }
    return out;
}

inline Matrix linear_gram(const Matrix& x) { // K = X^T X over example columns
    const int b = x.cols();
    Matrix k(b, b);
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < b; ++j) {
            double acc = 0.0;
            for (int r = 0; r < x.rows(); ++r) acc += x.at(r, i) * x.at(r, j);
            k.at(i, j) = acc;
        }
    }
    return k;
}

inline Matrix rbf_gram(const Matrix& x, double bandwidth_fraction) {
    const int b = x.cols();
    std::vector<double> dists;
    Matrix d2(b, b);
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < b; ++j) {
            double acc = 0.0;
            for (int r = 0; r < x.rows(); ++r) {
                const double diff = x.at(r, i) - x.at(r, j);
                acc += diff * diff;
            }
            d2.at(i, j) = acc;
            if (j > i) dists.push_back(std::sqrt(acc));
        }
    }
    std::sort(dists.begin(), dists.end());
    const double median = dists.size() % 2 == 1
                              ? dists[dists.size() / 2]
                              : 0.5 * (dists[dists.size() / 2 - 1] + dists[dists.size() / 2]);
    const double sigma = bandwidth_fraction * median;
    Matrix k(b, b);
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < b; ++j) {
            k.at(i, j) = std::exp(-d2.at(i, j) / (2.0 * sigma * sigma));
        }
    }
    return k;
}

// Biased HSIC via the explicit centering matrix H = I - 11^T/b and naive
// matrix products: tr(K H L H) / (b-1)^2.
inline double hsic_biased(const Matrix& k, const Matrix& l) {
    const int b = k.rows();
    Matrix h(b, b);
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < b; ++j) {
            h.at(i, j) = (i == j ? 1.0 : 0.0) - 1.0 / b;
        }
    }
    Matrix prod = matmul_triple_loop(matmul_triple_loop(matmul_triple_loop(k, h), l), h);
    double trace = 0.0;
    for (int i = 0; i < b; ++i) trace += prod.at(i, i);
    const double bm1 = static_cast<double>(b - 1);
    return trace / (bm1 * bm1);
}

inline double cka_from_grams(const Matrix& k, const Matrix& l) {
    return hsic_biased(k, l) / std::sqrt(hsic_biased(k, k) * hsic_biased(l, l));
}

// Frobenius-relative error, the metric for all gradient checks.
inline double rel_err(const Matrix& got, const Matrix& want) {
    double num = 0.0, den = 0.0;
    for (int r = 0; r < got.rows(); ++r) {
        for (int c = 0; c < got.cols(); ++c) {
            const double d = got.at(r, c) - want.at(r, c);
            num += d * d;
            den += want.at(r, c) * want.at(r, c);
        }
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

} // namespace oracles
