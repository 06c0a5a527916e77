#include "distillbench/run.hpp"

#include <filesystem>

#include "distillbench/checkpoint.hpp"
#include "distillbench/errors.hpp"
#include "distillbench/io.hpp"
#include "distillbench/trainer.hpp"

namespace distillbench {

namespace {

namespace fs = std::filesystem;

void prepare_out_dir(const RunConfig& cfg, const std::string& out_dir) {
    if (out_dir.empty()) {
        throw InvalidArgument("output directory must not be empty");
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
    }
    write_text_file((fs::path(out_dir) / "manifest.txt").string(), cfg.manifest_text());
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void require_teacher_ckpt(const RunConfig& cfg) {
    if (cfg.teacher_ckpt.empty()) {
        throw ConfigError("teacher_ckpt: required for this command");
    }
    if (!fs::exists(cfg.teacher_ckpt)) {
        throw ConfigError("teacher_ckpt: checkpoint '" + cfg.teacher_ckpt + "' does not exist");
    }
}

void require_data_csv(const RunConfig& cfg) {
    if (!cfg.data_csv.empty() && !fs::exists(cfg.data_csv)) {
        throw ConfigError("data_csv: file '" + cfg.data_csv + "' does not exist");
    }
}

} // namespace

DataBundle acquire_data(const RunConfig& cfg) {
    DataBundle bundle;
    if (!cfg.data_csv.empty()) {
        bundle.full = load_csv(cfg.data_csv, cfg.data_has_header);
    } else {
        bundle.full = gen_gaussian_mixture(cfg.data_classes, cfg.data_dim, cfg.data_per_class,
                                           cfg.data_spread, cfg.data_seed);
    }
    auto [train_set, test_set] = split(bundle.full, cfg.train_fraction, cfg.split_seed);
    bundle.train = std::move(train_set);
    bundle.test = std::move(test_set);
    return bundle;
}

void write_snapshots(const Network& net, const Dataset& ds, const std::string& out_dir,
                     const std::string& prefix) {
    EvalResult eval = evaluate(net, ds);
    Dataset features{std::move(eval.features), ds.labels, ds.class_count, ds.split_tag};
    Dataset logits{std::move(eval.logits), ds.labels, ds.class_count, ds.split_tag};
    save_csv(features, join(out_dir, prefix + "_" + ds.split_tag + "_features.csv"));
    save_csv(logits, join(out_dir, prefix + "_" + ds.split_tag + "_logits.csv"));
}

void cmd_gen_data(const RunConfig& cfg, const std::string& out_dir) {
    if (!cfg.data_csv.empty()) {
        throw ConfigError("data_csv: gen-data generates data and cannot also load it");
    }
    prepare_out_dir(cfg, out_dir);
    Dataset ds = gen_gaussian_mixture(cfg.data_classes, cfg.data_dim, cfg.data_per_class,
                                      cfg.data_spread, cfg.data_seed);
    save_csv(ds, join(out_dir, "data.csv"));
}

void cmd_train_teacher(const RunConfig& cfg, const std::string& out_dir) {
    require_data_csv(cfg);
    prepare_out_dir(cfg, out_dir);
    DataBundle data = acquire_data(cfg);
    DistillConfig train_cfg = cfg.train;
    train_cfg.mode = Mode::None;
    TrainResult result =
        train_teacher(cfg.teacher_hidden, cfg.teacher_activation, data.train, data.test, train_cfg);
    save_checkpoint(result.net, train_cfg.seed, train_cfg.epochs, join(out_dir, "teacher.ckpt"));
    write_text_file(join(out_dir, "train_log.csv"), train_log_csv(result.log));
    write_snapshots(result.net, data.train, out_dir, "teacher");
    write_snapshots(result.net, data.test, out_dir, "teacher");
}

namespace {

DistillResult distill_and_write(const RunConfig& cfg, const std::string& out_dir,
                                const Network& teacher, const DataBundle& data) {
    prepare_out_dir(cfg, out_dir);
    DistillResult result = distill(teacher, cfg.student_hidden, cfg.student_activation,
                                   data.train, data.test, cfg.train);
    save_checkpoint(result.student, cfg.train.seed, cfg.train.epochs,
                    join(out_dir, "student.ckpt"));
    write_text_file(join(out_dir, "train_log.csv"), train_log_csv(result.log));
    if (result.projectors) {
        // The returned student is projector-free; the sidecar keeps the
        // ensemble for analysis reruns.
        save_ensemble(*result.projectors, cfg.train.seed, cfg.train.epochs,
                      join(out_dir, "projectors.ckpt"));
    }
    if (result.logit_projector) {
        save_logit_projector(*result.logit_projector, cfg.train.seed, cfg.train.epochs,
                             join(out_dir, "logit_projector.ckpt"));
    }
    if (!result.cka_series.values.empty()) {
        write_text_file(join(out_dir, "cka_series.csv"), cka_series_csv(result.cka_series));
    }
    write_snapshots(result.student, data.train, out_dir, "student");
    write_snapshots(result.student, data.test, out_dir, "student");
    write_snapshots(teacher, data.train, out_dir, "teacher");
    write_snapshots(teacher, data.test, out_dir, "teacher");
    return result;
}

} // namespace

void cmd_distill(const RunConfig& cfg, const std::string& out_dir) {
    require_teacher_ckpt(cfg);
    require_data_csv(cfg);
    DataBundle data = acquire_data(cfg);
    Network teacher = load_checkpoint(cfg.teacher_ckpt).net;
    distill_and_write(cfg, out_dir, teacher, data);
}

void cmd_sweep(const RunConfig& cfg, const std::string& out_dir) {
    if (cfg.sweep_axis.empty()) {
        throw ConfigError("sweep_axis: required for sweep");
    }
    std::vector<std::string> values;
    for (const std::string& item : split(cfg.sweep_values, ',')) {
        const std::string value = trim(item);
        if (!value.empty()) {
            values.push_back(value);
        }
    }
    if (values.empty()) {
        throw ConfigError("sweep_values: required non-empty value list for sweep");
    }
    require_teacher_ckpt(cfg);
    require_data_csv(cfg);
    prepare_out_dir(cfg, out_dir);
    DataBundle data = acquire_data(cfg);
    Network teacher = load_checkpoint(cfg.teacher_ckpt).net;

    SweepTable table;
    table.axis = cfg.sweep_axis;
    for (const std::string& value : values) {
        RunConfig sub = cfg;
        sub.sweep_axis.clear();
        sub.sweep_values.clear();
        if (cfg.sweep_axis == "alpha") sub.train.alpha = parse_double(value, "sweep value");
        else if (cfg.sweep_axis == "beta") sub.train.beta = parse_double(value, "sweep value");
        else if (cfg.sweep_axis == "q") sub.train.q = static_cast<int>(parse_int(value, "sweep value"));
        else if (cfg.sweep_axis == "arch") sub.train.proj_arch = parse_proj_arch(value);
        else if (cfg.sweep_axis == "activation") sub.train.proj_activation = parse_activation(value);
        else if (cfg.sweep_axis == "init") {
            if (value != "mixed") parse_init_strategy(value);
            sub.train.proj_init = value;
        }
        sub.out_dir = join(out_dir, cfg.sweep_axis + "_" + value);

        DistillResult run = distill_and_write(sub, sub.out_dir, teacher, data);
        SweepRow row;
        row.axis_value = value;
        if (!run.log.rows.empty()) {
            row.final_train_acc = run.log.rows.back().train_acc;
            row.final_test_acc = run.log.rows.back().test_acc;
        } else {
            row.final_train_acc = evaluate(run.student, data.train).accuracy;
            row.final_test_acc = evaluate(run.student, data.test).accuracy;
        }
        table.rows.push_back(row);
    }
    write_text_file(join(out_dir, "sweep.csv"), sweep_csv(table));
}

} // namespace distillbench
