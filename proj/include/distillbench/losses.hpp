#pragma once

#include <string>
#include <vector>

#include "distillbench/matrix.hpp"
#include "distillbench/numkit.hpp"

namespace distillbench {

/// A scalar loss plus its gradient for each differentiated input, keyed by
/// input name. Teacher-side tensors never appear here: they receive no
/// gradients anywhere.
struct LossValue {
    double value = 0.0;
    std::vector<std::pair<std::string, Matrix>> grads;

    const Matrix& grad(const std::string& name) const;
    bool has_grad(const std::string& name) const;
};

/// value = sum of coeff_i * part_i; gradients combine with the same
/// coefficients (same-named gradients sum).
LossValue lincomb(const std::vector<std::pair<double, const LossValue*>>& parts);

/// Mean over the batch of -log softmax(z)[y]. Gradient "logits" is
/// (softmax - onehot) / b.
LossValue ce_loss(const Matrix& logits, const std::vector<int>& labels);

/// Direction alignment: 1 - (1/b) sum_i cos(g_i, t_i), norms clamped at eps.
/// Gradient "features" is with respect to g only; the teacher is frozen.
LossValue da_loss(const Matrix& g, const Matrix& t, double eps = kNormEps);

/// Same functional form applied to the ensemble-averaged features f(s).
LossValue mda_loss(const Matrix& f, const Matrix& t, double eps = kNormEps);

/// Soft-target loss in cross-entropy form, averaged over the batch:
/// -sum_i softmax(p/mu)_i log softmax(z/mu)_i. Gradient "student_logits"
/// carries the 1/mu chain factor; with mu_sq_grad it is additionally scaled
/// by mu^2 (the usual compensation so the soft-target term keeps its weight
/// as mu grows; the value is unchanged either way).
LossValue kl_loss(const Matrix& p, const Matrix& z, double mu, bool mu_sq_grad = true);

/// kl_loss with projected student logits v in place of z; gradient name is
/// "projected_logits".
LossValue mkl_loss(const Matrix& p, const Matrix& v, double mu, bool mu_sq_grad = true);

/// ce + alpha * mda (also covers the single-projector objective).
LossValue total_feature_loss(const LossValue& ce, const LossValue& mda, double alpha);

/// beta * ce + (1 - beta) * kl_or_mkl.
LossValue total_logit_loss(const LossValue& ce, const LossValue& kl_or_mkl, double beta);

/// Mean over the batch of the teacher distribution's entropy at temperature
/// mu; the exact gap between the cross-entropy form above and a proper KL.
double teacher_entropy(const Matrix& p, double mu);

/// Split of the proper-KL distillation loss for one sample into a binary
/// target-vs-rest part (tckd) and the within-non-target part (nckd):
/// kl = tckd + nckd_weight * nckd with nckd_weight = 1 - p_target(teacher).
struct DecompositionReport {
    double tckd = 0.0;
    double nckd = 0.0;
    double nckd_weight = 0.0;
    double reconstruction = 0.0; // tckd + nckd_weight * nckd
    double kl = 0.0;             // proper KL for reference
    bool degenerate = false;     // teacher target probability == 1
};

DecompositionReport tckd_nckd(const std::vector<double>& teacher_logits,
                              const std::vector<double>& student_logits, double mu, int target);

/// Per-field batch means over the columns of P and Z (degenerate samples
/// contribute nckd 0 with weight 0 and set the flag).
DecompositionReport tckd_nckd_mean(const Matrix& p, const Matrix& z,
                                   const std::vector<int>& labels, double mu);

} // namespace distillbench
