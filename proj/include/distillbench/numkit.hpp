#pragma once

#include <functional>
#include <string>
#include <vector>

#include "distillbench/matrix.hpp"
#include "distillbench/rng.hpp"

namespace distillbench {

// Shared clamp for L2 norms of near-zero feature columns.
inline constexpr double kNormEps = 1e-12;

enum class InitStrategy { FanInUniform, He, Orthogonal };

InitStrategy parse_init_strategy(const std::string& name); // error on unknown name
std::string init_strategy_name(InitStrategy s);

/// fan_in_uniform: i.i.d. uniform on [-1/sqrt(cols), +1/sqrt(cols)].
/// he: i.i.d. normal with std sqrt(2/cols).
/// orthogonal: Q factor of a square i.i.d. normal matrix (Householder QR,
/// sign-corrected so R's diagonal is positive), truncated to rows x cols.
Matrix init_matrix(int rows, int cols, InitStrategy strategy, SeededRng& rng);

/// Each column scaled to unit L2 norm; columns with norm < eps are divided
/// by eps instead.
Matrix l2_normalize_columns(const Matrix& x, double eps = kNormEps);

std::vector<double> column_l2_norms(const Matrix& x);

/// Temperature softmax with max-subtraction stabilization. mu must be > 0.
std::vector<double> softmax_temp(const std::vector<double>& logits, double mu);

/// softmax_temp applied to every column.
Matrix softmax_columns(const Matrix& logits, double mu);

/// log(softmax(v/mu)) for one column, in log-sum-exp form (finite for any
/// finite input).
std::vector<double> log_softmax_temp(const std::vector<double>& logits, double mu);

/// Central differences (f(x+h e) - f(x-h e)) / 2h entrywise; the gradient
/// oracle used by the backward tests. f must be finite at all probe points.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x, double h);

} // namespace distillbench
