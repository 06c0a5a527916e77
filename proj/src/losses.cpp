#include "distillbench/losses.hpp"

#include <cmath>

#include "distillbench/errors.hpp"

namespace distillbench {

const Matrix& LossValue::grad(const std::string& name) const {
    for (const auto& [key, matrix] : grads) {
        if (key == name) {
            return matrix;
        }
    }
    throw InvalidArgument("loss has no gradient named '" + name + "'");
}

bool LossValue::has_grad(const std::string& name) const {
    for (const auto& [key, matrix] : grads) {
        if (key == name) {
            return true;
        }
    }
    return false;
}

LossValue lincomb(const std::vector<std::pair<double, const LossValue*>>& parts) {
    LossValue out;
    for (const auto& [coeff, part] : parts) {
        out.value += coeff * part->value;
        for (const auto& [name, grad] : part->grads) {
            bool merged = false;
            for (auto& [outname, outgrad] : out.grads) {
                if (outname == name) {
                    add_scaled_inplace(outgrad, coeff, grad);
                    merged = true;
                    break;
                }
            }
            if (!merged) {
                out.grads.emplace_back(name, scale(grad, coeff));
            }
        }
    }
    return out;
}

LossValue ce_loss(const Matrix& logits, const std::vector<int>& labels) {
    const int classes = logits.rows();
    const int batch = logits.cols();
    if (static_cast<int>(labels.size()) != batch) {
        throw DimensionError("ce_loss: " + std::to_string(labels.size()) + " labels for batch " +
                             std::to_string(batch));
    }
    for (int i = 0; i < batch; ++i) {
        if (labels[i] < 0 || labels[i] >= classes) {
            throw InvalidArgument("ce_loss: label " + std::to_string(labels[i]) + " at sample " +
                                  std::to_string(i) + " outside [0, " + std::to_string(classes) +
                                  ")");
        }
    }
    LossValue out;
    Matrix dz(classes, batch);
    std::vector<double> col(classes);
    const double inv_b = 1.0 / static_cast<double>(batch);
    double total = 0.0;
    for (int c = 0; c < batch; ++c) {
        for (int r = 0; r < classes; ++r) col[r] = logits.at(r, c);
        std::vector<double> logp = log_softmax_temp(col, 1.0);
        total -= logp[labels[c]];
        std::vector<double> prob = softmax_temp(col, 1.0);
        for (int r = 0; r < classes; ++r) {
            dz.at(r, c) = (prob[r] - (r == labels[c] ? 1.0 : 0.0)) * inv_b;
        }
    }
    out.value = total * inv_b;
    out.grads.emplace_back("logits", std::move(dz));
    return out;
}

namespace {

// Shared core of the DA and MDA losses; the gradient lands on `grad_name`.
LossValue direction_alignment(const Matrix& g, const Matrix& t, double eps,
                              const std::string& grad_name) {
    if (!g.same_shape(t)) {
        throw DimensionError("direction alignment shape mismatch: " + g.shape_str() + " vs " +
                             t.shape_str());
    }
    if (eps <= 0.0) {
        throw InvalidArgument("direction alignment requires eps > 0");
    }
    const int batch = g.cols();
    const double inv_b = 1.0 / static_cast<double>(batch);
    Matrix dg(g.rows(), g.cols());
    double cos_sum = 0.0;
    for (int c = 0; c < batch; ++c) {
        double dot = 0.0;
        double gnorm2 = 0.0;
        double tnorm2 = 0.0;
        for (int r = 0; r < g.rows(); ++r) {
            dot += g.at(r, c) * t.at(r, c);
            gnorm2 += g.at(r, c) * g.at(r, c);
            tnorm2 += t.at(r, c) * t.at(r, c);
        }
        const double gnorm = std::sqrt(gnorm2);
        const double ng = std::max(gnorm, eps);
        const double nt = std::max(std::sqrt(tnorm2), eps);
        const double cosine = dot / (ng * nt);
        cos_sum += cosine;
        if (gnorm > eps) {
            for (int r = 0; r < g.rows(); ++r) {
                dg.at(r, c) =
                    -inv_b * (t.at(r, c) / (ng * nt) - dot * g.at(r, c) / (ng * ng * ng * nt));
            }
        } else {
            // Clamped denominator: the cosine is linear in g here.
            for (int r = 0; r < g.rows(); ++r) {
                dg.at(r, c) = -inv_b * t.at(r, c) / (ng * nt);
            }
        }
    }
    LossValue out;
    out.value = 1.0 - cos_sum * inv_b;
    out.grads.emplace_back(grad_name, std::move(dg));
    return out;
}

LossValue soft_target_loss(const Matrix& p, const Matrix& z, double mu, bool mu_sq_grad,
                           const std::string& grad_name) {
    if (mu <= 0.0) {
        throw InvalidArgument("soft-target temperature must be > 0, got " + std::to_string(mu));
    }
    if (!p.same_shape(z)) {
        throw DimensionError("soft-target loss shape mismatch: teacher " + p.shape_str() +
                             " vs student " + z.shape_str());
    }
    const int classes = p.rows();
    const int batch = p.cols();
    const double inv_b = 1.0 / static_cast<double>(batch);
    const double grad_scale = mu_sq_grad ? mu * inv_b : inv_b / mu;
    Matrix dz(classes, batch);
    std::vector<double> pcol(classes);
    std::vector<double> zcol(classes);
    double total = 0.0;
    for (int c = 0; c < batch; ++c) {
        for (int r = 0; r < classes; ++r) {
            pcol[r] = p.at(r, c);
            zcol[r] = z.at(r, c);
        }
        std::vector<double> phat = softmax_temp(pcol, mu);
        std::vector<double> zlog = log_softmax_temp(zcol, mu);
        std::vector<double> zhat = softmax_temp(zcol, mu);
        for (int r = 0; r < classes; ++r) {
            total -= phat[r] * zlog[r];
            dz.at(r, c) = grad_scale * (zhat[r] - phat[r]);
        }
    }
    LossValue out;
    out.value = total * inv_b;
    out.grads.emplace_back(grad_name, std::move(dz));
    return out;
}

} // namespace

LossValue da_loss(const Matrix& g, const Matrix& t, double eps) {
    return direction_alignment(g, t, eps, "features");
}

LossValue mda_loss(const Matrix& f, const Matrix& t, double eps) {
    return direction_alignment(f, t, eps, "features");
}

LossValue kl_loss(const Matrix& p, const Matrix& z, double mu, bool mu_sq_grad) {
    return soft_target_loss(p, z, mu, mu_sq_grad, "student_logits");
}

LossValue mkl_loss(const Matrix& p, const Matrix& v, double mu, bool mu_sq_grad) {
    return soft_target_loss(p, v, mu, mu_sq_grad, "projected_logits");
}

LossValue total_feature_loss(const LossValue& ce, const LossValue& mda, double alpha) {
    if (alpha < 0.0) {
        throw InvalidArgument("total_feature_loss requires alpha >= 0");
    }
    return lincomb({{1.0, &ce}, {alpha, &mda}});
}

LossValue total_logit_loss(const LossValue& ce, const LossValue& kl_or_mkl, double beta) {
    if (beta < 0.0 || beta > 1.0) {
        throw InvalidArgument("total_logit_loss requires beta in [0, 1]");
    }
    return lincomb({{beta, &ce}, {1.0 - beta, &kl_or_mkl}});
}

double teacher_entropy(const Matrix& p, double mu) {
    if (mu <= 0.0) {
        throw InvalidArgument("teacher_entropy temperature must be > 0");
    }
    const int classes = p.rows();
    std::vector<double> col(classes);
    double total = 0.0;
    for (int c = 0; c < p.cols(); ++c) {
        for (int r = 0; r < classes; ++r) col[r] = p.at(r, c);
        std::vector<double> phat = softmax_temp(col, mu);
        std::vector<double> plog = log_softmax_temp(col, mu);
        for (int r = 0; r < classes; ++r) {
            if (phat[r] > 0.0) {
                total -= phat[r] * plog[r];
            }
        }
    }
    return total / static_cast<double>(p.cols());
}

DecompositionReport tckd_nckd(const std::vector<double>& teacher_logits,
                              const std::vector<double>& student_logits, double mu, int target) {
    if (mu <= 0.0) {
        throw InvalidArgument("tckd_nckd temperature must be > 0");
    }
    const int classes = static_cast<int>(teacher_logits.size());
    if (classes < 2) {
        throw InvalidArgument("tckd_nckd needs at least 2 classes");
    }
    if (student_logits.size() != teacher_logits.size()) {
        throw DimensionError("tckd_nckd: teacher has " + std::to_string(classes) +
                             " classes, student " + std::to_string(student_logits.size()));
    }
    if (target < 0 || target >= classes) {
        throw InvalidArgument("tckd_nckd: target " + std::to_string(target) + " outside [0, " +
                              std::to_string(classes) + ")");
    }

    std::vector<double> phat = softmax_temp(teacher_logits, mu);
    std::vector<double> zhat = softmax_temp(student_logits, mu);
    std::vector<double> plog = log_softmax_temp(teacher_logits, mu);
    std::vector<double> zlog = log_softmax_temp(student_logits, mu);

    DecompositionReport report;
    for (int i = 0; i < classes; ++i) {
        if (phat[i] > 0.0) {
            report.kl += phat[i] * (plog[i] - zlog[i]);
        }
    }

    const double pt = phat[target];
    const double zt = zhat[target];
    const double prest = 1.0 - pt;
    const double zrest = 1.0 - zt;
    if (prest <= 0.0 || zrest <= 0.0) {
        // Teacher (or student) puts all mass on the target: the non-target
        // distribution is undefined.
        report.degenerate = true;
        report.tckd = report.kl;
        report.nckd = 0.0;
        report.nckd_weight = 0.0;
        report.reconstruction = report.tckd;
        return report;
    }

    double tckd = 0.0;
    if (pt > 0.0) {
        tckd += pt * std::log(pt / zt);
    }
    tckd += prest * std::log(prest / zrest);
    double nckd = 0.0;
    for (int i = 0; i < classes; ++i) {
        if (i == target || phat[i] <= 0.0) {
            continue;
        }
        const double ptilde = phat[i] / prest;
        const double ztilde = zhat[i] / zrest;
        nckd += ptilde * std::log(ptilde / ztilde);
    }
    report.tckd = tckd;
    report.nckd = nckd;
    report.nckd_weight = prest;
    report.reconstruction = tckd + prest * nckd;
    return report;
}

DecompositionReport tckd_nckd_mean(const Matrix& p, const Matrix& z,
                                   const std::vector<int>& labels, double mu) {
    if (!p.same_shape(z)) {
        throw DimensionError("tckd_nckd_mean shape mismatch: " + p.shape_str() + " vs " +
                             z.shape_str());
    }
    const int batch = p.cols();
    if (static_cast<int>(labels.size()) != batch) {
        throw DimensionError("tckd_nckd_mean: " + std::to_string(labels.size()) +
                             " labels for batch " + std::to_string(batch));
    }
    DecompositionReport mean;
    std::vector<double> pcol(p.rows());
    std::vector<double> zcol(p.rows());
    for (int c = 0; c < batch; ++c) {
        for (int r = 0; r < p.rows(); ++r) {
            pcol[r] = p.at(r, c);
            zcol[r] = z.at(r, c);
        }
        DecompositionReport one = tckd_nckd(pcol, zcol, mu, labels[c]);
        mean.tckd += one.tckd;
        mean.nckd += one.nckd;
        mean.nckd_weight += one.nckd_weight;
        mean.reconstruction += one.reconstruction;
        mean.kl += one.kl;
        mean.degenerate = mean.degenerate || one.degenerate;
    }
    const double inv_b = 1.0 / static_cast<double>(batch);
    mean.tckd *= inv_b;
    mean.nckd *= inv_b;
    mean.nckd_weight *= inv_b;
    mean.reconstruction *= inv_b;
    mean.kl *= inv_b;
    return mean;
}

} // namespace distillbench
