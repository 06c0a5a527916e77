#pragma once

#include <string>

#include "distillbench/config.hpp"
#include "distillbench/dataset.hpp"

namespace distillbench {

/// Dataset acquisition shared by every command: load data_csv when set,
/// otherwise generate the configured Gaussian mixture; then the stratified
/// split. The config must already have derived seeds resolved.
struct DataBundle {
    Dataset full;
    Dataset train;
    Dataset test;
};

DataBundle acquire_data(const RunConfig& cfg);

// Each command validates the config (paths included) before any work, writes
// manifest.txt with the fully resolved config, and drops its artifacts into
// out_dir. Artifact names are fixed:
//   gen-data:       data.csv
//   train-teacher:  teacher.ckpt, train_log.csv, teacher_{train,test}_{features,logits}.csv
//   distill:        student.ckpt, train_log.csv, cka_series.csv (when tracked),
//                   projectors.ckpt / logit_projector.ckpt (mode dependent),
//                   student_*, teacher_* snapshot CSVs
//   sweep:          sweep.csv plus one subdirectory per axis value
void cmd_gen_data(const RunConfig& cfg, const std::string& out_dir);
void cmd_train_teacher(const RunConfig& cfg, const std::string& out_dir);
void cmd_distill(const RunConfig& cfg, const std::string& out_dir);
void cmd_sweep(const RunConfig& cfg, const std::string& out_dir);

// Snapshot CSVs are dataset files whose "features" are logits or network
// features and whose label column is the sample's ground truth.
void write_snapshots(const Network& net, const Dataset& ds, const std::string& out_dir,
                     const std::string& prefix);

} // namespace distillbench
