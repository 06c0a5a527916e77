#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "distillbench/network.hpp"
#include "distillbench/projector.hpp"

namespace distillbench {

enum class Mode { None, Feature, FeatureNoproj, Logit, LogitProj };

Mode parse_mode(const std::string& name);
std::string mode_name(Mode m);

enum class CkaKind { Linear, Rbf };

/// Every hyper-parameter of a single training run.
struct DistillConfig {
    Mode mode = Mode::Feature;
    double alpha = 25.0;
    double beta = 0.5;
    double mu = 4.0;
    bool mu_sq_grad = true;
    int q = 3;
    ProjArch proj_arch = ProjArch::L1;
    Activation proj_activation = Activation::Relu;
    std::string proj_init = "fan_in_uniform"; // strategy name or "mixed"
    bool proj_weight_decay = true;
    bool freeze_logit_proj = false; // pin the logit projector at exact identity
    double lr = 0.05;
    double momentum = 0.9;
    double weight_decay = 0.0005;
    int epochs = 60;
    std::vector<int> lr_drop_epochs;
    double lr_drop_factor = 0.1;
    int batch_size = 32;
    std::uint64_t seed = 1;
    int es_epoch = 0; // stop the distillation term after this epoch; 0 = never
    int cka_every = 0; // track CKA every k epochs; 0 = off
    CkaKind cka_kind = CkaKind::Linear;
    double rbf_bandwidth_fraction = 0.5;
};

/// Full experiment description: training plus dataset, analysis toggles, and
/// the sweep axis. Round-trips through flat key=value text; the resolved
/// form is the run manifest.
struct RunConfig {
    DistillConfig train;

    std::vector<int> student_hidden = {32};
    Activation student_activation = Activation::Relu;
    std::vector<int> teacher_hidden = {64, 64};
    Activation teacher_activation = Activation::Relu;
    std::string teacher_ckpt;

    std::string data_csv;
    bool data_has_header = false;
    int data_classes = 10;
    int data_dim = 16;
    int data_per_class = 200;
    double data_spread = 0.3;
    std::uint64_t data_seed = 0;  // 0 = derive from seed
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0; // 0 = derive from seed

    int ece_bins = 15;
    int affinity_top_n = 2;

    std::string sweep_axis;   // alpha | beta | q | arch | activation | init
    std::string sweep_values; // comma-separated axis values

    std::string out_dir; // optional; CLI may override

    // Fills the derived seeds; manifests always carry resolved values.
    void resolve_derived();

    std::map<std::string, std::string> to_kv() const;
    std::string manifest_text() const;
};

/// Parse flat key=value text ('#' comments and blank lines allowed).
/// Duplicate keys are an error.
std::map<std::string, std::string> parse_kv_text(const std::string& text);

/// Build a RunConfig from key=value pairs. Unknown keys and invalid values
/// are collected and reported together in one ConfigError.
RunConfig config_from_kv(const std::map<std::string, std::string>& kv);

RunConfig config_from_text(const std::string& text);

} // namespace distillbench
