#include "distillbench/numkit.hpp"

#include <algorithm>
#include <cmath>

#include "distillbench/errors.hpp"

namespace distillbench {

InitStrategy parse_init_strategy(const std::string& name) {
    if (name == "fan_in_uniform") return InitStrategy::FanInUniform;
    if (name == "he") return InitStrategy::He;
    if (name == "orthogonal") return InitStrategy::Orthogonal;
    throw InvalidArgument("unknown init strategy '" + name +
                          "' (expected fan_in_uniform, he, or orthogonal)");
}

std::string init_strategy_name(InitStrategy s) {
    switch (s) {
        case InitStrategy::FanInUniform: return "fan_in_uniform";
        case InitStrategy::He: return "he";
        case InitStrategy::Orthogonal: return "orthogonal";
    }
    return "?";
}

namespace {

// Householder QR of a square matrix; returns Q with columns sign-corrected
// so that the diagonal of R is positive.
Matrix orthogonal_square(int n, SeededRng& rng) {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a.at(i, j) = rng.normal();
        }
    }
    Matrix q = identity(n);
    std::vector<double> v(n, 0.0);
    for (int k = 0; k < n - 1; ++k) {
        double norm = 0.0;
        for (int i = k; i < n; ++i) {
            norm += a.at(i, k) * a.at(i, k);
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            continue; // column already zero below the diagonal
        }
        double alpha = a.at(k, k) >= 0.0 ? -norm : norm;
        double vnorm2 = 0.0;
        for (int i = k; i < n; ++i) {
            v[i] = a.at(i, k);
            if (i == k) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 == 0.0) {
            continue;
        }
        // Apply H = I - 2 v v^T / (v^T v) to A (left) and accumulate into Q.
        for (int j = k; j < n; ++j) {
            double dot = 0.0;
            for (int i = k; i < n; ++i) dot += v[i] * a.at(i, j);
            double f = 2.0 * dot / vnorm2;
            for (int i = k; i < n; ++i) a.at(i, j) -= f * v[i];
        }
        for (int j = 0; j < n; ++j) {
            double dot = 0.0;
            for (int i = k; i < n; ++i) dot += v[i] * q.at(i, j);
            double f = 2.0 * dot / vnorm2;
            for (int i = k; i < n; ++i) q.at(i, j) -= f * v[i];
        }
    }
    // q currently holds H_{n-2}...H_0, i.e. Q^T; a holds R.
    Matrix qt = transpose(q);
    for (int k = 0; k < n; ++k) {
        if (a.at(k, k) < 0.0) {
            for (int i = 0; i < n; ++i) {
                qt.at(i, k) = -qt.at(i, k);
            }
        }
    }
    return qt;
}

} // namespace

Matrix init_matrix(int rows, int cols, InitStrategy strategy, SeededRng& rng) {
    if (rows < 1 || cols < 1) {
        throw InvalidArgument("init_matrix dimensions must be >= 1, got " + std::to_string(rows) +
                              "x" + std::to_string(cols));
    }
    switch (strategy) {
        case InitStrategy::FanInUniform: {
            Matrix out(rows, cols);
            const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
            for (int i = 0; i < rows; ++i) {
                for (int j = 0; j < cols; ++j) {
                    out.at(i, j) = rng.uniform(-bound, bound);
                }
            }
            return out;
        }
        case InitStrategy::He: {
            Matrix out(rows, cols);
            const double stddev = std::sqrt(2.0 / static_cast<double>(cols));
            for (int i = 0; i < rows; ++i) {
                for (int j = 0; j < cols; ++j) {
                    out.at(i, j) = stddev * rng.normal();
                }
            }
            return out;
        }
        case InitStrategy::Orthogonal: {
            // Non-square: factor the max(rows, cols) square and truncate.
            const int n = std::max(rows, cols);
            Matrix q = orthogonal_square(n, rng);
            Matrix out(rows, cols);
            for (int i = 0; i < rows; ++i) {
                for (int j = 0; j < cols; ++j) {
                    out.at(i, j) = q.at(i, j);
                }
            }
            return out;
        }
    }
    throw InvalidArgument("unknown init strategy");
}

Matrix l2_normalize_columns(const Matrix& x, double eps) {
    if (eps <= 0.0) {
        throw InvalidArgument("l2_normalize_columns requires eps > 0");
    }
    Matrix out = x;
    for (int c = 0; c < x.cols(); ++c) {
        double norm2 = 0.0;
        for (int r = 0; r < x.rows(); ++r) {
            norm2 += x.at(r, c) * x.at(r, c);
        }
        double denom = std::max(std::sqrt(norm2), eps);
        for (int r = 0; r < x.rows(); ++r) {
            out.at(r, c) = x.at(r, c) / denom;
        }
    }
    return out;
}

std::vector<double> column_l2_norms(const Matrix& x) {
    std::vector<double> norms(x.cols(), 0.0);
    for (int c = 0; c < x.cols(); ++c) {
        double norm2 = 0.0;
        for (int r = 0; r < x.rows(); ++r) {
            norm2 += x.at(r, c) * x.at(r, c);
        }
        norms[c] = std::sqrt(norm2);
    }
    return norms;
}

std::vector<double> softmax_temp(const std::vector<double>& logits, double mu) {
    if (mu <= 0.0) {
        throw InvalidArgument("softmax temperature must be > 0, got " + std::to_string(mu));
    }
    if (logits.empty()) {
        throw InvalidArgument("softmax of an empty vector");
    }
    const double maxv = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp((logits[i] - maxv) / mu);
        sum += out[i];
    }
    for (double& p : out) {
        p /= sum;
    }
    return out;
}

Matrix softmax_columns(const Matrix& logits, double mu) {
    Matrix out(logits.rows(), logits.cols());
    std::vector<double> col(logits.rows());
    for (int c = 0; c < logits.cols(); ++c) {
        for (int r = 0; r < logits.rows(); ++r) col[r] = logits.at(r, c);
        std::vector<double> p = softmax_temp(col, mu);
        for (int r = 0; r < logits.rows(); ++r) out.at(r, c) = p[r];
    }
    return out;
}

std::vector<double> log_softmax_temp(const std::vector<double>& logits, double mu) {
    if (mu <= 0.0) {
        throw InvalidArgument("softmax temperature must be > 0, got " + std::to_string(mu));
    }
    if (logits.empty()) {
        throw InvalidArgument("softmax of an empty vector");
    }
    const double maxv = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) {
        sum += std::exp((v - maxv) / mu);
    }
    const double lse = std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = (logits[i] - maxv) / mu - lse;
    }
    return out;
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x, double h) {
    if (h <= 0.0) {
        throw InvalidArgument("finite_diff_grad requires h > 0");
    }
    Matrix grad(x.rows(), x.cols());
    Matrix probe = x;
    for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < x.cols(); ++j) {
            const double orig = probe.at(i, j);
            probe.at(i, j) = orig + h;
            const double fplus = f(probe);
            probe.at(i, j) = orig - h;
            const double fminus = f(probe);
            probe.at(i, j) = orig;
            if (!std::isfinite(fplus) || !std::isfinite(fminus)) {
                throw NumericError("finite_diff_grad: non-finite function value at probe (" +
                                   std::to_string(i) + "," + std::to_string(j) + ")");
            }
            grad.at(i, j) = (fplus - fminus) / (2.0 * h);
        }
    }
    return grad;
}

} // namespace distillbench
