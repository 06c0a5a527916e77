#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distillbench/analysis.hpp"
#include "distillbench/config.hpp"
#include "distillbench/dataset.hpp"
#include "distillbench/network.hpp"
#include "distillbench/projector.hpp"

namespace distillbench {

struct TrainLogRow {
    int epoch = 0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double ce = 0.0;      // epoch mean per sample
    double distill = 0.0; // unweighted distillation component; exactly 0 when inactive
    double total = 0.0;   // the optimized objective
    bool has_cka = false;
    double cka = 0.0;
    double wall_seconds = 0.0; // not exported to CSV
};

struct TrainLog {
    std::vector<TrainLogRow> rows;
};

// epoch,train_acc,test_acc,ce,distill,total,cka (cka empty when untracked)
std::string train_log_csv(const TrainLog& log);

struct EvalResult {
    double accuracy = 0.0;
    Matrix features; // feature_dim x n
    Matrix logits;   // c x n
    std::vector<int> labels;
};

/// Deterministic full-split pass; prediction is the argmax (first max on ties).
EvalResult evaluate(const Network& net, const Dataset& ds);

/// lr0 * factor^k where k counts drop epochs <= epoch (1-based epochs).
double lr_at_epoch(const DistillConfig& cfg, int epoch);

// Per-purpose seed streams derived from the run seed, so e.g. projector
// initialization cannot perturb the student's init or the batch order.
inline constexpr std::uint64_t kProjSeedOffset = 101;
inline constexpr std::uint64_t kShuffleSeedOffset = 202;
inline constexpr std::uint64_t kLogitProjSeedOffset = 303;

std::vector<LayerSpec> mlp_specs(int input_dim, const std::vector<int>& hidden, Activation act,
                                 int classes);

struct TrainResult {
    Network net;
    TrainLog log;
};

/// Plain cross-entropy training with the SGD schedule (cfg.mode must be none).
TrainResult train_teacher(const std::vector<int>& hidden, Activation act,
                          const Dataset& train_set, const Dataset& test_set,
                          const DistillConfig& cfg);

struct DistillResult {
    Network student;
    TrainLog log;
    CkaSeries cka_series; // filled when cka_every > 0
    std::optional<ProjectorEnsemble> projectors;     // feature mode
    std::optional<LogitProjector> logit_projector;   // logit_proj mode
};

/// One run of the distillation loop. The mode selects the loss graph:
///   feature         ce + alpha * mda over the projector ensemble
///   feature_noproj  ce + alpha * da on raw features (needs d == m)
///   logit           beta * ce + (1 - beta) * kl
///   logit_proj      beta * ce + (1 - beta) * mkl through the logit projector
/// Only the student and its projectors are updated; the teacher is read-only.
/// Projectors are dropped from the returned student and handed back
/// separately for sidecar persistence.
DistillResult distill(const Network& teacher, const std::vector<int>& hidden, Activation act,
                      const Dataset& train_set, const Dataset& test_set,
                      const DistillConfig& cfg);

struct SweepRow {
    std::string axis_value;
    double final_train_acc = 0.0;
    double final_test_acc = 0.0;
};

struct SweepTable {
    std::string axis;
    std::vector<SweepRow> rows;
};

// axis_value,final_train_acc,final_test_acc
std::string sweep_csv(const SweepTable& table);

/// One full distill per value with the axis applied to a copy of the base
/// config; the shared seed keeps the student initialization identical across
/// values.
SweepTable run_sweep(const Network& teacher, const RunConfig& base, const std::string& axis,
                     const std::vector<std::string>& values, const Dataset& train_set,
                     const Dataset& test_set);

} // namespace distillbench
