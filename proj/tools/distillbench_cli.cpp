// distillbench command-line driver. Talks to the library exclusively through
// the C API in distillbench.h; config assembly (file + flag overrides) happens
// here, validation happens in the library.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "distillbench.h"

namespace {

std::string read_file_or_die(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "error: cannot open config file '%s'\n", path.c_str());
        std::exit(1);
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// key=value lines from a config file; last occurrence wins so files can be
// layered before flag overrides are applied.
std::map<std::string, std::string> parse_config_file(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos) continue; // library reports malformed lines
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

std::string render_config(const std::map<std::string, std::string>& kv) {
    std::ostringstream out;
    for (const auto& [key, value] : kv) {
        out << key << '=' << value << '\n';
    }
    return out.str();
}

// All run-config keys reachable as flags. Values stay strings; the library
// owns type and range validation so file and flag input fail identically.
struct RunOptions {
    std::string config_path;
    std::string out_dir;
    std::map<std::string, std::string> overrides;
};

const std::vector<std::pair<const char*, const char*>> kRunFlags = {
    {"--mode", "mode"},
    {"--alpha", "alpha"},
    {"--beta", "beta"},
    {"--mu", "mu"},
    {"--mu-sq-grad", "mu_sq_grad"},
    {"--q", "q"},
    {"--proj-arch", "proj_arch"},
    {"--proj-activation", "proj_activation"},
    {"--proj-init", "proj_init"},
    {"--proj-weight-decay", "proj_weight_decay"},
    {"--freeze-logit-proj", "freeze_logit_proj"},
    {"--lr", "lr"},
    {"--momentum", "momentum"},
    {"--weight-decay", "weight_decay"},
    {"--epochs", "epochs"},
    {"--lr-drop-epochs", "lr_drop_epochs"},
    {"--lr-drop-factor", "lr_drop_factor"},
    {"--batch-size", "batch_size"},
    {"--seed", "seed"},
    {"--es-epoch", "es_epoch"},
    {"--cka-every", "cka_every"},
    {"--cka-kind", "cka_kind"},
    {"--rbf-bandwidth-fraction", "rbf_bandwidth_fraction"},
    {"--student-hidden", "student_hidden"},
    {"--student-activation", "student_activation"},
    {"--teacher-hidden", "teacher_hidden"},
    {"--teacher-activation", "teacher_activation"},
    {"--teacher", "teacher_ckpt"},
    {"--data", "data_csv"},
    {"--data-has-header", "data_has_header"},
    {"--data-classes", "data_classes"},
    {"--data-dim", "data_dim"},
    {"--data-per-class", "data_per_class"},
    {"--data-spread", "data_spread"},
    {"--data-seed", "data_seed"},
    {"--train-fraction", "train_fraction"},
    {"--split-seed", "split_seed"},
    {"--ece-bins", "ece_bins"},
    {"--affinity-top-n", "affinity_top_n"},
    {"--axis", "sweep_axis"},
    {"--values", "sweep_values"},
};

void attach_run_options(CLI::App* cmd, RunOptions& opts) {
    cmd->add_option("--config", opts.config_path, "key=value config file");
    cmd->add_option("--out", opts.out_dir, "output directory for artifacts");
    for (const auto& [flag, key] : kRunFlags) {
        const std::string key_copy = key;
        cmd->add_option_function<std::string>(
            flag, [&opts, key_copy](const std::string& value) { opts.overrides[key_copy] = value; },
            std::string("config key ") + key);
    }
}

std::string resolve_out_dir(const RunOptions& opts,
                            const std::map<std::string, std::string>& kv,
                            const std::string& command) {
    if (!opts.out_dir.empty()) return opts.out_dir;
    auto it = kv.find("out_dir");
    if (it != kv.end() && !it->second.empty()) return it->second;
    if (const char* root = std::getenv("DISTILLBENCH_OUT"); root && *root) {
        return std::string(root) + "/" + command;
    }
    return "runs/" + command;
}

int run_command(const RunOptions& opts, const std::string& command,
                db_status (*fn)(const char*, const char*)) {
    std::map<std::string, std::string> kv;
    if (!opts.config_path.empty()) {
        kv = parse_config_file(read_file_or_die(opts.config_path));
    }
    for (const auto& [key, value] : opts.overrides) {
        kv[key] = value;
    }
    const std::string out_dir = resolve_out_dir(opts, kv, command);
    kv["out_dir"] = out_dir;
    const std::string config = render_config(kv);
    db_status status = fn(config.c_str(), out_dir.c_str());
    if (status != DB_OK) {
        std::fprintf(stderr, "error (%s): %s\n", db_status_name(status), db_last_error());
        return 1;
    }
    std::printf("%s: artifacts written to %s\n", command.c_str(), out_dir.c_str());
    return 0;
}

int fail_status(db_status status) {
    std::fprintf(stderr, "error (%s): %s\n", db_status_name(status), db_last_error());
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"distillbench: a desk-scale knowledge-distillation laboratory"};
    app.require_subcommand(1);

    RunOptions gen_opts, teacher_opts, distill_opts, sweep_opts;
    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset CSV");
    attach_run_options(gen, gen_opts);
    CLI::App* teach = app.add_subcommand("train-teacher", "train a teacher with cross-entropy");
    attach_run_options(teach, teacher_opts);
    CLI::App* dist = app.add_subcommand("distill", "train a student against a teacher checkpoint");
    attach_run_options(dist, distill_opts);
    CLI::App* sweep = app.add_subcommand("sweep", "run a distillation sweep over one axis");
    attach_run_options(sweep, sweep_opts);

    CLI::App* analyze = app.add_subcommand("analyze", "post-hoc analysis of saved snapshots");
    analyze->require_subcommand(1);

    std::string cka_a, cka_b, cka_kind = "linear";
    double cka_fraction = 0.5;
    CLI::App* cka = analyze->add_subcommand("cka", "CKA similarity between two feature snapshots");
    cka->add_option("--a", cka_a, "first feature snapshot CSV")->required();
    cka->add_option("--b", cka_b, "second feature snapshot CSV")->required();
    cka->add_option("--kind", cka_kind, "linear or rbf (default linear)");
    cka->add_option("--bandwidth-fraction", cka_fraction,
                    "rbf bandwidth as a fraction of the median pairwise distance");

    std::string ece_logits, ece_out;
    int ece_bins = 15;
    CLI::App* ece = analyze->add_subcommand("ece", "expected calibration error of a logits snapshot");
    ece->add_option("--logits", ece_logits, "logits snapshot CSV")->required();
    ece->add_option("--bins", ece_bins, "number of equal-width confidence bins (default 15)");
    ece->add_option("--out", ece_out, "write the reliability diagram CSV here");

    std::string aff_student, aff_teacher, aff_proj, aff_out = "affinity.csv";
    int aff_top_n = 2;
    CLI::App* affinity =
        analyze->add_subcommand("affinity", "per-projector class affinity ranking");
    affinity->add_option("--student-features", aff_student, "student feature snapshot CSV")->required();
    affinity->add_option("--teacher-features", aff_teacher, "teacher feature snapshot CSV")->required();
    affinity->add_option("--projectors", aff_proj, "projector ensemble checkpoint")->required();
    affinity->add_option("--top-n", aff_top_n, "classes blocked per projector (default 2)");
    affinity->add_option("--out", aff_out, "output CSV path (default affinity.csv)");

    std::string dec_teacher, dec_student, dec_out;
    double dec_mu = 4.0;
    CLI::App* decompose =
        analyze->add_subcommand("decompose", "target/non-target split of the soft-target loss");
    decompose->add_option("--teacher-logits", dec_teacher, "teacher logits snapshot CSV")->required();
    decompose->add_option("--student-logits", dec_student, "student logits snapshot CSV")->required();
    decompose->add_option("--mu", dec_mu, "softmax temperature (default 4)");
    decompose->add_option("--out", dec_out, "write the decomposition CSV here");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) return run_command(gen_opts, "gen-data", db_run_gen_data);
    if (teach->parsed()) return run_command(teacher_opts, "train-teacher", db_run_train_teacher);
    if (dist->parsed()) return run_command(distill_opts, "distill", db_run_distill);
    if (sweep->parsed()) return run_command(sweep_opts, "sweep", db_run_sweep);

    if (cka->parsed()) {
        double value = 0.0;
        db_status status =
            cka_kind == "rbf"
                ? db_analyze_cka_rbf(cka_a.c_str(), cka_b.c_str(), cka_fraction, &value)
                : db_analyze_cka_linear(cka_a.c_str(), cka_b.c_str(), &value);
        if (status != DB_OK) return fail_status(status);
        std::printf("%.17g\n", value);
        return 0;
    }
    if (ece->parsed()) {
        double value = 0.0;
        db_status status = db_analyze_ece(ece_logits.c_str(), ece_bins,
                                          ece_out.empty() ? nullptr : ece_out.c_str(), &value);
        if (status != DB_OK) return fail_status(status);
        std::printf("%.17g\n", value);
        return 0;
    }
    if (affinity->parsed()) {
        db_status status = db_analyze_affinity(aff_student.c_str(), aff_teacher.c_str(),
                                               aff_proj.c_str(), aff_top_n, aff_out.c_str());
        if (status != DB_OK) return fail_status(status);
        std::printf("affinity table written to %s\n", aff_out.c_str());
        return 0;
    }
    if (decompose->parsed()) {
        double tckd = 0.0, nckd = 0.0, weight = 0.0;
        db_status status = db_analyze_decompose(dec_teacher.c_str(), dec_student.c_str(), dec_mu,
                                                dec_out.empty() ? nullptr : dec_out.c_str(),
                                                &tckd, &nckd, &weight);
        if (status != DB_OK) return fail_status(status);
        std::printf("tckd %.17g\nnckd %.17g\nnckd_weight %.17g\n", tckd, nckd, weight);
        return 0;
    }
    return 0;
}
