#include "distillbench/config.hpp"

#include <algorithm>
#include <sstream>

#include "distillbench/errors.hpp"
#include "distillbench/io.hpp"

namespace distillbench {

Mode parse_mode(const std::string& name) {
    if (name == "none") return Mode::None;
    if (name == "feature") return Mode::Feature;
    if (name == "feature_noproj") return Mode::FeatureNoproj;
    if (name == "logit") return Mode::Logit;
    if (name == "logit_proj") return Mode::LogitProj;
    throw InvalidArgument("unknown mode '" + name +
                          "' (expected none, feature, feature_noproj, logit, or logit_proj)");
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::None: return "none";
        case Mode::Feature: return "feature";
        case Mode::FeatureNoproj: return "feature_noproj";
        case Mode::Logit: return "logit";
        case Mode::LogitProj: return "logit_proj";
    }
    return "?";
}

namespace {

std::string int_list_string(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& key) {
    std::vector<int> out;
    if (trim(text).empty()) {
        return out;
    }
    for (const std::string& item : split(text, ',')) {
        out.push_back(static_cast<int>(parse_int(trim(item), "key " + key)));
    }
    return out;
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw InvalidArgument("key " + key + ": expected true or false, got '" + text + "'");
}

} // namespace

void RunConfig::resolve_derived() {
    if (data_seed == 0) data_seed = train.seed;
    if (split_seed == 0) split_seed = train.seed + 1;
}

std::map<std::string, std::string> RunConfig::to_kv() const {
    std::map<std::string, std::string> kv;
    kv["mode"] = mode_name(train.mode);
    kv["alpha"] = format_double(train.alpha);
    kv["beta"] = format_double(train.beta);
    kv["mu"] = format_double(train.mu);
    kv["mu_sq_grad"] = train.mu_sq_grad ? "true" : "false";
    kv["q"] = std::to_string(train.q);
    kv["proj_arch"] = proj_arch_name(train.proj_arch);
    kv["proj_activation"] = activation_name(train.proj_activation);
    kv["proj_init"] = train.proj_init;
    kv["proj_weight_decay"] = train.proj_weight_decay ? "true" : "false";
    kv["freeze_logit_proj"] = train.freeze_logit_proj ? "true" : "false";
    kv["lr"] = format_double(train.lr);
    kv["momentum"] = format_double(train.momentum);
    kv["weight_decay"] = format_double(train.weight_decay);
    kv["epochs"] = std::to_string(train.epochs);
    kv["lr_drop_epochs"] = int_list_string(train.lr_drop_epochs);
    kv["lr_drop_factor"] = format_double(train.lr_drop_factor);
    kv["batch_size"] = std::to_string(train.batch_size);
    kv["seed"] = std::to_string(train.seed);
    kv["es_epoch"] = std::to_string(train.es_epoch);
    kv["cka_every"] = std::to_string(train.cka_every);
    kv["cka_kind"] = train.cka_kind == CkaKind::Linear ? "linear" : "rbf";
    kv["rbf_bandwidth_fraction"] = format_double(train.rbf_bandwidth_fraction);
    kv["student_hidden"] = int_list_string(student_hidden);
    kv["student_activation"] = activation_name(student_activation);
    kv["teacher_hidden"] = int_list_string(teacher_hidden);
    kv["teacher_activation"] = activation_name(teacher_activation);
    kv["teacher_ckpt"] = teacher_ckpt;
    kv["data_csv"] = data_csv;
    kv["data_has_header"] = data_has_header ? "true" : "false";
    kv["data_classes"] = std::to_string(data_classes);
    kv["data_dim"] = std::to_string(data_dim);
    kv["data_per_class"] = std::to_string(data_per_class);
    kv["data_spread"] = format_double(data_spread);
    kv["data_seed"] = std::to_string(data_seed);
    kv["train_fraction"] = format_double(train_fraction);
    kv["split_seed"] = std::to_string(split_seed);
    kv["ece_bins"] = std::to_string(ece_bins);
    kv["affinity_top_n"] = std::to_string(affinity_top_n);
    kv["sweep_axis"] = sweep_axis;
    kv["sweep_values"] = sweep_values;
    kv["out_dir"] = out_dir;
    return kv;
}

std::string RunConfig::manifest_text() const {
    std::ostringstream out;
    for (const auto& [key, value] : to_kv()) {
        out << key << '=' << value << '\n';
    }
    return out.str();
}

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::vector<std::string> lines = split(text, '\n');
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string line = trim(lines[li]);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(li + 1) +
                              ": expected key=value, got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(li + 1) + ": empty key");
        }
        if (kv.count(key)) {
            throw ConfigError("config line " + std::to_string(li + 1) + ": duplicate key '" +
                              key + "'");
        }
        kv[key] = value;
    }
    return kv;
}

RunConfig config_from_kv(const std::map<std::string, std::string>& kv) {
    RunConfig cfg;
    std::vector<std::string> problems;

    auto take = [&](const std::string& key, auto&& apply) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            return;
        }
        try {
            apply(it->second);
        } catch (const Error& e) {
            problems.push_back(key + ": " + e.what());
        }
    };

    std::vector<std::string> known;
    auto key_taken = [&known](const std::string& key) { known.push_back(key); return key; };

    take(key_taken("mode"), [&](const std::string& v) { cfg.train.mode = parse_mode(v); });
    take(key_taken("alpha"), [&](const std::string& v) { cfg.train.alpha = parse_double(v, "key alpha"); });
    take(key_taken("beta"), [&](const std::string& v) { cfg.train.beta = parse_double(v, "key beta"); });
    take(key_taken("mu"), [&](const std::string& v) { cfg.train.mu = parse_double(v, "key mu"); });
    take(key_taken("mu_sq_grad"), [&](const std::string& v) { cfg.train.mu_sq_grad = parse_bool(v, "mu_sq_grad"); });
    take(key_taken("q"), [&](const std::string& v) { cfg.train.q = static_cast<int>(parse_int(v, "key q")); });
    take(key_taken("proj_arch"), [&](const std::string& v) { cfg.train.proj_arch = parse_proj_arch(v); });
    take(key_taken("proj_activation"),
         [&](const std::string& v) { cfg.train.proj_activation = parse_activation(v); });
    take(key_taken("proj_init"), [&](const std::string& v) {
        if (v != "mixed") parse_init_strategy(v); // validates the name
        cfg.train.proj_init = v;
    });
    take(key_taken("proj_weight_decay"),
         [&](const std::string& v) { cfg.train.proj_weight_decay = parse_bool(v, "proj_weight_decay"); });
    take(key_taken("freeze_logit_proj"),
         [&](const std::string& v) { cfg.train.freeze_logit_proj = parse_bool(v, "freeze_logit_proj"); });
    take(key_taken("lr"), [&](const std::string& v) { cfg.train.lr = parse_double(v, "key lr"); });
    take(key_taken("momentum"), [&](const std::string& v) { cfg.train.momentum = parse_double(v, "key momentum"); });
    take(key_taken("weight_decay"),
         [&](const std::string& v) { cfg.train.weight_decay = parse_double(v, "key weight_decay"); });
    take(key_taken("epochs"), [&](const std::string& v) { cfg.train.epochs = static_cast<int>(parse_int(v, "key epochs")); });
    take(key_taken("lr_drop_epochs"),
         [&](const std::string& v) { cfg.train.lr_drop_epochs = parse_int_list(v, "lr_drop_epochs"); });
    take(key_taken("lr_drop_factor"),
         [&](const std::string& v) { cfg.train.lr_drop_factor = parse_double(v, "key lr_drop_factor"); });
    take(key_taken("batch_size"),
         [&](const std::string& v) { cfg.train.batch_size = static_cast<int>(parse_int(v, "key batch_size")); });
    take(key_taken("seed"), [&](const std::string& v) {
        cfg.train.seed = static_cast<std::uint64_t>(parse_int(v, "key seed"));
    });
    take(key_taken("es_epoch"), [&](const std::string& v) { cfg.train.es_epoch = static_cast<int>(parse_int(v, "key es_epoch")); });
    take(key_taken("cka_every"), [&](const std::string& v) { cfg.train.cka_every = static_cast<int>(parse_int(v, "key cka_every")); });
    take(key_taken("cka_kind"), [&](const std::string& v) {
        if (v == "linear") cfg.train.cka_kind = CkaKind::Linear;
        else if (v == "rbf") cfg.train.cka_kind = CkaKind::Rbf;
        else throw InvalidArgument("expected linear or rbf, got '" + v + "'");
    });
    take(key_taken("rbf_bandwidth_fraction"), [&](const std::string& v) {
        cfg.train.rbf_bandwidth_fraction = parse_double(v, "key rbf_bandwidth_fraction");
    });
    take(key_taken("student_hidden"),
         [&](const std::string& v) { cfg.student_hidden = parse_int_list(v, "student_hidden"); });
    take(key_taken("student_activation"),
         [&](const std::string& v) { cfg.student_activation = parse_activation(v); });
    take(key_taken("teacher_hidden"),
         [&](const std::string& v) { cfg.teacher_hidden = parse_int_list(v, "teacher_hidden"); });
    take(key_taken("teacher_activation"),
         [&](const std::string& v) { cfg.teacher_activation = parse_activation(v); });
    take(key_taken("teacher_ckpt"), [&](const std::string& v) { cfg.teacher_ckpt = v; });
    take(key_taken("data_csv"), [&](const std::string& v) { cfg.data_csv = v; });
    take(key_taken("data_has_header"),
         [&](const std::string& v) { cfg.data_has_header = parse_bool(v, "data_has_header"); });
    take(key_taken("data_classes"),
         [&](const std::string& v) { cfg.data_classes = static_cast<int>(parse_int(v, "key data_classes")); });
    take(key_taken("data_dim"), [&](const std::string& v) { cfg.data_dim = static_cast<int>(parse_int(v, "key data_dim")); });
    take(key_taken("data_per_class"),
         [&](const std::string& v) { cfg.data_per_class = static_cast<int>(parse_int(v, "key data_per_class")); });
    take(key_taken("data_spread"),
         [&](const std::string& v) { cfg.data_spread = parse_double(v, "key data_spread"); });
    take(key_taken("data_seed"), [&](const std::string& v) {
        cfg.data_seed = static_cast<std::uint64_t>(parse_int(v, "key data_seed"));
    });
    take(key_taken("train_fraction"),
         [&](const std::string& v) { cfg.train_fraction = parse_double(v, "key train_fraction"); });
    take(key_taken("split_seed"), [&](const std::string& v) {
        cfg.split_seed = static_cast<std::uint64_t>(parse_int(v, "key split_seed"));
    });
    take(key_taken("ece_bins"), [&](const std::string& v) { cfg.ece_bins = static_cast<int>(parse_int(v, "key ece_bins")); });
    take(key_taken("affinity_top_n"),
         [&](const std::string& v) { cfg.affinity_top_n = static_cast<int>(parse_int(v, "key affinity_top_n")); });
    take(key_taken("sweep_axis"), [&](const std::string& v) { cfg.sweep_axis = v; });
    take(key_taken("sweep_values"), [&](const std::string& v) { cfg.sweep_values = v; });
    take(key_taken("out_dir"), [&](const std::string& v) { cfg.out_dir = v; });

    for (const auto& [key, value] : kv) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            problems.push_back(key + ": unknown key");
        }
    }

    // Range checks run on whatever parsed, so one pass reports everything.
    auto check = [&](bool ok, const std::string& message) {
        if (!ok) problems.push_back(message);
    };
    check(cfg.train.alpha >= 0.0, "alpha: must be >= 0");
    check(cfg.train.beta >= 0.0 && cfg.train.beta <= 1.0, "beta: must be in [0, 1]");
    check(cfg.train.mu > 0.0, "mu: must be > 0");
    check(cfg.train.q >= 1, "q: must be >= 1");
    check(cfg.train.lr > 0.0, "lr: must be > 0");
    check(cfg.train.momentum >= 0.0 && cfg.train.momentum < 1.0, "momentum: must be in [0, 1)");
    check(cfg.train.weight_decay >= 0.0, "weight_decay: must be >= 0");
    check(cfg.train.epochs >= 0, "epochs: must be >= 0");
    check(cfg.train.lr_drop_factor > 0.0, "lr_drop_factor: must be > 0");
    check(cfg.train.batch_size >= 1, "batch_size: must be >= 1");
    check(cfg.train.es_epoch >= 0, "es_epoch: must be >= 0 (0 disables)");
    check(cfg.train.es_epoch <= cfg.train.epochs, "es_epoch: must be <= epochs");
    check(cfg.train.cka_every >= 0, "cka_every: must be >= 0 (0 disables)");
    check(cfg.train.rbf_bandwidth_fraction > 0.0, "rbf_bandwidth_fraction: must be > 0");
    for (int h : cfg.student_hidden) check(h >= 1, "student_hidden: widths must be >= 1");
    for (int h : cfg.teacher_hidden) check(h >= 1, "teacher_hidden: widths must be >= 1");
    for (int e : cfg.train.lr_drop_epochs) check(e >= 1, "lr_drop_epochs: epochs must be >= 1");
    check(cfg.data_classes >= 1, "data_classes: must be >= 1");
    check(cfg.data_dim >= 1, "data_dim: must be >= 1");
    check(cfg.data_per_class >= 1, "data_per_class: must be >= 1");
    check(cfg.data_spread > 0.0, "data_spread: must be > 0");
    check(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0,
          "train_fraction: must be in (0, 1)");
    check(cfg.ece_bins >= 1, "ece_bins: must be >= 1");
    check(cfg.affinity_top_n >= 1, "affinity_top_n: must be >= 1");
    if (!cfg.sweep_axis.empty()) {
        static const char* kAxes[] = {"alpha", "beta", "q", "arch", "activation", "init"};
        check(std::find_if(std::begin(kAxes), std::end(kAxes),
                           [&](const char* a) { return cfg.sweep_axis == a; }) != std::end(kAxes),
              "sweep_axis: expected alpha, beta, q, arch, activation, or init");
    }

    if (!problems.empty()) {
        std::string message = "invalid configuration (" + std::to_string(problems.size()) +
                              " problem(s)):";
        for (const std::string& p : problems) {
            message += "\n  - " + p;
        }
        throw ConfigError(message);
    }
    return cfg;
}

RunConfig config_from_text(const std::string& text) {
    return config_from_kv(parse_kv_text(text));
}

} // namespace distillbench
