#include "distillbench/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "distillbench/errors.hpp"
#include "distillbench/io.hpp"
#include "distillbench/losses.hpp"

namespace distillbench {

std::string train_log_csv(const TrainLog& log) {
    std::ostringstream out;
    out << "epoch,train_acc,test_acc,ce,distill,total,cka\n";
    for (const TrainLogRow& row : log.rows) {
        out << row.epoch << ',' << format_double(row.train_acc) << ','
            << format_double(row.test_acc) << ',' << format_double(row.ce) << ','
            << format_double(row.distill) << ',' << format_double(row.total) << ',';
        if (row.has_cka) {
            out << format_double(row.cka);
        }
        out << '\n';
    }
    return out.str();
}

EvalResult evaluate(const Network& net, const Dataset& ds) {
    ForwardPass pass = forward(net, ds.x);
    int correct = 0;
    for (int c = 0; c < ds.size(); ++c) {
        int pred = 0;
        for (int r = 1; r < pass.logits.rows(); ++r) {
            if (pass.logits.at(r, c) > pass.logits.at(pred, c)) {
                pred = r;
            }
        }
        if (pred == ds.labels[c]) {
            ++correct;
        }
    }
    EvalResult result;
    result.accuracy = static_cast<double>(correct) / ds.size();
    result.features = std::move(pass.features);
    result.logits = std::move(pass.logits);
    result.labels = ds.labels;
    return result;
}

double lr_at_epoch(const DistillConfig& cfg, int epoch) {
    int drops = 0;
    for (int d : cfg.lr_drop_epochs) {
        if (epoch >= d) {
            ++drops;
        }
    }
    return cfg.lr * std::pow(cfg.lr_drop_factor, drops);
}

std::vector<LayerSpec> mlp_specs(int input_dim, const std::vector<int>& hidden, Activation act,
                                 int classes) {
    std::vector<LayerSpec> specs;
    int in = input_dim;
    for (int h : hidden) {
        specs.push_back({in, h, act});
        in = h;
    }
    specs.push_back({in, classes, Activation::None});
    return specs;
}

namespace {

std::vector<int> select_labels(const std::vector<int>& labels, const std::vector<int>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (int i : idx) {
        out.push_back(labels[i]);
    }
    return out;
}

struct LoopResult {
    TrainLog log;
    CkaSeries cka_series;
};

// The shared minibatch loop behind train_teacher and distill. `teacher` is
// null for plain cross-entropy training.
LoopResult training_loop(Network& student, const Network* teacher, const Dataset& train_set,
                         const Dataset& test_set, const DistillConfig& cfg,
                         ProjectorEnsemble* ensemble, LogitProjector* logit_proj) {
    const int n = train_set.size();
    const bool feature_mode =
        cfg.mode == Mode::Feature || cfg.mode == Mode::FeatureNoproj;
    const bool logit_mode = cfg.mode == Mode::Logit || cfg.mode == Mode::LogitProj;

    // The teacher is fixed, so its train-split outputs can be computed once.
    Matrix teacher_features;
    Matrix teacher_logits;
    if (teacher != nullptr) {
        EvalResult teval = evaluate(*teacher, train_set);
        teacher_features = std::move(teval.features);
        teacher_logits = std::move(teval.logits);
    }

    NetSgdState student_state = make_sgd_state(student);
    ProjSgdState ensemble_state;
    if (ensemble != nullptr) {
        ensemble_state = make_sgd_state(*ensemble);
    }
    Matrix logit_proj_velocity;
    if (logit_proj != nullptr) {
        logit_proj_velocity = Matrix(logit_proj->weight.rows(), logit_proj->weight.cols());
    }

    SeededRng shuffle_rng(cfg.seed + kShuffleSeedOffset);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    LoopResult result;
    result.cka_series.kind = cfg.cka_kind == CkaKind::Linear ? "linear" : "rbf";
    result.cka_series.bandwidth_fraction = cfg.rbf_bandwidth_fraction;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        const double lr = lr_at_epoch(cfg, epoch);
        SgdParams net_params{lr, cfg.momentum, cfg.weight_decay};
        SgdParams proj_params{lr, cfg.momentum,
                              cfg.proj_weight_decay ? cfg.weight_decay : 0.0};
        const bool distill_active =
            teacher != nullptr && (cfg.es_epoch == 0 || epoch <= cfg.es_epoch);

        shuffle_rng.shuffle(order);

        double ce_sum = 0.0;
        double distill_sum = 0.0;
        double total_sum = 0.0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int stop = std::min(start + cfg.batch_size, n);
            std::vector<int> batch_idx(order.begin() + start, order.begin() + stop);
            const int bsize = stop - start;

            Matrix xb = columns(train_set.x, batch_idx);
            std::vector<int> yb = select_labels(train_set.labels, batch_idx);

            ForwardPass pass = forward(student, xb);
            LossValue ce = ce_loss(pass.logits, yb);

            Matrix dz;
            Matrix ds(student.feature_dim(), bsize);
            double distill_value = 0.0;
            double total_value = 0.0;

            EnsemblePass epass;
            Matrix logit_proj_dw;
            bool have_logit_proj_grad = false;

            if (!distill_active) {
                // Early-stopped (or teacherless) epochs optimize the bare
                // cross-entropy term; the mode's CE coefficient is kept.
                const double coeff = logit_mode ? cfg.beta : 1.0;
                total_value = coeff * ce.value;
                dz = scale(ce.grad("logits"), coeff);
            } else if (feature_mode) {
                Matrix tb = columns(teacher_features, batch_idx);
                LossValue align;
                if (cfg.mode == Mode::Feature) {
                    epass = ensemble_project(*ensemble, pass.features);
                    align = mda_loss(epass.output, tb);
                } else {
                    align = da_loss(pass.features, tb);
                }
                LossValue total = total_feature_loss(ce, align, cfg.alpha);
                distill_value = align.value;
                total_value = total.value;
                dz = total.grad("logits");
                const Matrix& df = total.grad("features");
                if (cfg.mode == Mode::Feature) {
                    EnsembleGradients egrads = ensemble_backward(*ensemble, epass, df);
                    ds = std::move(egrads.input);
                    sgd_update(*ensemble, egrads, ensemble_state, proj_params);
                } else {
                    ds = df;
                }
            } else { // logit distillation
                Matrix pb = columns(teacher_logits, batch_idx);
                LossValue soft;
                if (cfg.mode == Mode::LogitProj) {
                    Matrix v = project_logits(*logit_proj, pass.logits);
                    soft = mkl_loss(pb, v, cfg.mu, cfg.mu_sq_grad);
                    LossValue total = total_logit_loss(ce, soft, cfg.beta);
                    distill_value = soft.value;
                    total_value = total.value;
                    LogitProjGradients lpg = project_logits_backward(
                        *logit_proj, pass.logits, total.grad("projected_logits"));
                    dz = total.grad("logits");
                    add_scaled_inplace(dz, 1.0, lpg.logits);
                    logit_proj_dw = std::move(lpg.weight);
                    have_logit_proj_grad = true;
                } else {
                    soft = kl_loss(pb, pass.logits, cfg.mu, cfg.mu_sq_grad);
                    LossValue total = total_logit_loss(ce, soft, cfg.beta);
                    distill_value = soft.value;
                    total_value = total.value;
                    dz = total.grad("logits");
                    add_scaled_inplace(dz, 1.0, total.grad("student_logits"));
                }
            }

            if (!std::isfinite(total_value)) {
                throw NumericError("training diverged: non-finite loss at epoch " +
                                   std::to_string(epoch));
            }

            NetGradients grads = backward(student, pass, dz, ds);
            sgd_update(student, grads, student_state, net_params);
            if (have_logit_proj_grad && !cfg.freeze_logit_proj) {
                sgd_step(logit_proj->weight, logit_proj_dw, logit_proj_velocity, proj_params);
                ++logit_proj->version;
            }

            ce_sum += ce.value * bsize;
            distill_sum += distill_value * bsize;
            total_sum += total_value * bsize;
        }

        EvalResult train_eval = evaluate(student, train_set);
        EvalResult test_eval = evaluate(student, test_set);

        TrainLogRow row;
        row.epoch = epoch;
        row.train_acc = train_eval.accuracy;
        row.test_acc = test_eval.accuracy;
        row.ce = ce_sum / n;
        row.distill = distill_sum / n;
        row.total = total_sum / n;
        if (teacher != nullptr && cfg.cka_every > 0 &&
            (epoch % cfg.cka_every == 0 || epoch == cfg.epochs)) {
            const double value =
                cfg.cka_kind == CkaKind::Linear
                    ? linear_cka(train_eval.features, teacher_features)
                    : rbf_cka(train_eval.features, teacher_features,
                              cfg.rbf_bandwidth_fraction);
            row.has_cka = true;
            row.cka = value;
            result.cka_series.values.emplace_back(epoch, value);
        }
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start)
                .count();
        result.log.rows.push_back(row);
    }
    return result;
}

} // namespace

TrainResult train_teacher(const std::vector<int>& hidden, Activation act,
                          const Dataset& train_set, const Dataset& test_set,
                          const DistillConfig& cfg) {
    if (cfg.mode != Mode::None) {
        throw InvalidArgument("train_teacher requires mode none, got " + mode_name(cfg.mode));
    }
    Network net(mlp_specs(train_set.dim(), hidden, act, train_set.class_count), cfg.seed);
    LoopResult loop = training_loop(net, nullptr, train_set, test_set, cfg, nullptr, nullptr);
    return {std::move(net), std::move(loop.log)};
}

DistillResult distill(const Network& teacher, const std::vector<int>& hidden, Activation act,
                      const Dataset& train_set, const Dataset& test_set,
                      const DistillConfig& cfg) {
    if (cfg.mode == Mode::None) {
        throw InvalidArgument("distill requires a distillation mode, got none");
    }
    if (teacher.input_dim() != train_set.dim()) {
        throw DimensionError("teacher expects input dim " + std::to_string(teacher.input_dim()) +
                             ", dataset provides " + std::to_string(train_set.dim()));
    }
    if (teacher.class_count() != train_set.class_count) {
        throw DimensionError("teacher has " + std::to_string(teacher.class_count()) +
                             " classes, dataset " + std::to_string(train_set.class_count));
    }

    Network student(mlp_specs(train_set.dim(), hidden, act, train_set.class_count), cfg.seed);

    DistillResult result{std::move(student), {}, {}, std::nullopt, std::nullopt};

    ProjectorEnsemble* ensemble_ptr = nullptr;
    LogitProjector* logit_proj_ptr = nullptr;
    if (cfg.mode == Mode::Feature) {
        result.projectors =
            build_ensemble(result.student.feature_dim(), teacher.feature_dim(), cfg.q,
                           cfg.proj_arch, cfg.proj_activation, cfg.proj_init,
                           cfg.seed + kProjSeedOffset);
        ensemble_ptr = &*result.projectors;
    } else if (cfg.mode == Mode::FeatureNoproj) {
        if (result.student.feature_dim() != teacher.feature_dim()) {
            throw DimensionError(
                "feature_noproj needs matching feature dims, student d=" +
                std::to_string(result.student.feature_dim()) +
                " vs teacher m=" + std::to_string(teacher.feature_dim()));
        }
    } else if (cfg.mode == Mode::LogitProj) {
        SeededRng rng(cfg.seed + kLogitProjSeedOffset);
        LogitProjector lp = make_logit_projector(train_set.class_count, rng);
        if (cfg.freeze_logit_proj) {
            lp.weight = identity(train_set.class_count);
        }
        result.logit_projector = std::move(lp);
        logit_proj_ptr = &*result.logit_projector;
    }

    LoopResult loop = training_loop(result.student, &teacher, train_set, test_set, cfg,
                                    ensemble_ptr, logit_proj_ptr);
    result.log = std::move(loop.log);
    result.cka_series = std::move(loop.cka_series);
    return result;
}

std::string sweep_csv(const SweepTable& table) {
    std::ostringstream out;
    out << "axis_value,final_train_acc,final_test_acc\n";
    for (const SweepRow& row : table.rows) {
        out << row.axis_value << ',' << format_double(row.final_train_acc) << ','
            << format_double(row.final_test_acc) << '\n';
    }
    return out.str();
}

SweepTable run_sweep(const Network& teacher, const RunConfig& base, const std::string& axis,
                     const std::vector<std::string>& values, const Dataset& train_set,
                     const Dataset& test_set) {
    if (values.empty()) {
        throw InvalidArgument("run_sweep needs a non-empty value list");
    }
    SweepTable table;
    table.axis = axis;
    for (const std::string& value : values) {
        RunConfig cfg = base;
        if (axis == "alpha") {
            cfg.train.alpha = parse_double(value, "sweep value");
        } else if (axis == "beta") {
            cfg.train.beta = parse_double(value, "sweep value");
        } else if (axis == "q") {
            cfg.train.q = static_cast<int>(parse_int(value, "sweep value"));
        } else if (axis == "arch") {
            cfg.train.proj_arch = parse_proj_arch(value);
        } else if (axis == "activation") {
            cfg.train.proj_activation = parse_activation(value);
        } else if (axis == "init") {
            if (value != "mixed") parse_init_strategy(value);
            cfg.train.proj_init = value;
        } else {
            throw InvalidArgument("unknown sweep axis '" + axis +
                                  "' (expected alpha, beta, q, arch, activation, or init)");
        }
        DistillResult run = distill(teacher, cfg.student_hidden, cfg.student_activation,
                                    train_set, test_set, cfg.train);
        SweepRow row;
        row.axis_value = value;
        if (!run.log.rows.empty()) {
            row.final_train_acc = run.log.rows.back().train_acc;
            row.final_test_acc = run.log.rows.back().test_acc;
        } else {
            row.final_train_acc = evaluate(run.student, train_set).accuracy;
            row.final_test_acc = evaluate(run.student, test_set).accuracy;
        }
        table.rows.push_back(row);
    }
    return table;
}

} // namespace distillbench
