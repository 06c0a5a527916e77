#include "distillbench.h"

#include <sstream>
#include <string>

#include "distillbench/analysis.hpp"
#include "distillbench/checkpoint.hpp"
#include "distillbench/config.hpp"
#include "distillbench/dataset.hpp"
#include "distillbench/errors.hpp"
#include "distillbench/io.hpp"
#include "distillbench/losses.hpp"
#include "distillbench/projector.hpp"
#include "distillbench/run.hpp"
#include "distillbench/trainer.hpp"

using namespace distillbench;

struct db_dataset {
    Dataset ds;
};

struct db_network {
    Network net;
    std::uint64_t seed = 0;
    int epoch = 0;
};

namespace {

thread_local std::string g_last_error = "no error";

db_status fail(db_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Translate core exceptions into status codes; shared by every entry point.
template <class Fn>
db_status guarded(Fn&& fn) {
    try {
        fn();
        return DB_OK;
    } catch (const DimensionError& e) {
        return fail(DB_ERR_DIMENSION, e.what());
    } catch (const ParseError& e) {
        return fail(DB_ERR_PARSE, e.what());
    } catch (const ConfigError& e) {
        return fail(DB_ERR_CONFIG, e.what());
    } catch (const NumericError& e) {
        return fail(DB_ERR_NUMERIC, e.what());
    } catch (const DegenerateError& e) {
        return fail(DB_ERR_DEGENERATE, e.what());
    } catch (const IoError& e) {
        return fail(DB_ERR_IO, e.what());
    } catch (const InvalidArgument& e) {
        return fail(DB_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(DB_ERR_UNKNOWN, e.what());
    } catch (...) {
        return fail(DB_ERR_UNKNOWN, "unknown error");
    }
}

db_status require(bool ok, const char* what) {
    if (ok) {
        return DB_OK;
    }
    return fail(DB_ERR_NULL_POINTER, std::string("null argument: ") + what);
}

#define DB_REQUIRE(cond, what)                        \
    do {                                              \
        db_status st_ = require((cond) != 0, (what)); \
        if (st_ != DB_OK) return st_;                 \
    } while (0)

RunConfig resolved_config(const char* config) {
    RunConfig cfg = config_from_text(config ? config : "");
    cfg.resolve_derived();
    return cfg;
}

} // namespace

extern "C" {

const char* db_status_name(db_status status) {
    switch (status) {
        case DB_OK: return "ok";
        case DB_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case DB_ERR_DIMENSION: return "dimension_mismatch";
        case DB_ERR_PARSE: return "parse_error";
        case DB_ERR_CONFIG: return "config_error";
        case DB_ERR_NUMERIC: return "numeric_error";
        case DB_ERR_DEGENERATE: return "degenerate_input";
        case DB_ERR_IO: return "io_error";
        case DB_ERR_NULL_POINTER: return "null_pointer";
        case DB_ERR_UNKNOWN: return "unknown";
    }
    return "unknown";
}

const char* db_version(void) {
    return "1.0.0";
}

const char* db_last_error(void) {
    return g_last_error.c_str();
}

db_status db_dataset_generate(int32_t classes, int32_t dim, int32_t per_class, double spread,
                              uint64_t seed, db_dataset** out) {
    DB_REQUIRE(out, "out");
    return guarded([&] {
        auto handle = new db_dataset{gen_gaussian_mixture(classes, dim, per_class, spread, seed)};
        *out = handle;
    });
}

db_status db_dataset_load_csv(const char* path, int32_t has_header, db_dataset** out) {
    DB_REQUIRE(path, "path");
    DB_REQUIRE(out, "out");
    return guarded([&] { *out = new db_dataset{load_csv(path, has_header != 0)}; });
}

db_status db_dataset_save_csv(const db_dataset* ds, const char* path) {
    DB_REQUIRE(ds, "ds");
    DB_REQUIRE(path, "path");
    return guarded([&] { save_csv(ds->ds, path); });
}

db_status db_dataset_split(const db_dataset* ds, double train_fraction, uint64_t seed,
                           db_dataset** train_out, db_dataset** test_out) {
    DB_REQUIRE(ds, "ds");
    DB_REQUIRE(train_out, "train_out");
    DB_REQUIRE(test_out, "test_out");
    return guarded([&] {
        auto [train_set, test_set] = split(ds->ds, train_fraction, seed);
        *train_out = new db_dataset{std::move(train_set)};
        *test_out = new db_dataset{std::move(test_set)};
    });
}

db_status db_dataset_info(const db_dataset* ds, int32_t* samples, int32_t* dim,
                          int32_t* classes) {
    DB_REQUIRE(ds, "ds");
    if (samples) *samples = ds->ds.size();
    if (dim) *dim = ds->ds.dim();
    if (classes) *classes = ds->ds.class_count;
    return DB_OK;
}

void db_dataset_free(db_dataset* ds) {
    delete ds;
}

db_status db_network_load(const char* path, db_network** out) {
    DB_REQUIRE(path, "path");
    DB_REQUIRE(out, "out");
    return guarded([&] {
        LoadedCheckpoint loaded = load_checkpoint(path);
        *out = new db_network{std::move(loaded.net), loaded.seed, loaded.epoch};
    });
}

db_status db_network_save(const db_network* net, const char* path) {
    DB_REQUIRE(net, "net");
    DB_REQUIRE(path, "path");
    return guarded([&] { save_checkpoint(net->net, net->seed, net->epoch, path); });
}

db_status db_network_evaluate(const db_network* net, const db_dataset* ds,
                              double* accuracy_out) {
    DB_REQUIRE(net, "net");
    DB_REQUIRE(ds, "ds");
    DB_REQUIRE(accuracy_out, "accuracy_out");
    return guarded([&] { *accuracy_out = evaluate(net->net, ds->ds).accuracy; });
}

db_status db_network_snapshot(const db_network* net, const db_dataset* ds,
                              const char* features_csv, const char* logits_csv) {
    DB_REQUIRE(net, "net");
    DB_REQUIRE(ds, "ds");
    return guarded([&] {
        EvalResult eval = evaluate(net->net, ds->ds);
        if (features_csv) {
            Dataset snap{std::move(eval.features), ds->ds.labels, ds->ds.class_count,
                         ds->ds.split_tag};
            save_csv(snap, features_csv);
        }
        if (logits_csv) {
            Dataset snap{std::move(eval.logits), ds->ds.labels, ds->ds.class_count,
                         ds->ds.split_tag};
            save_csv(snap, logits_csv);
        }
    });
}

void db_network_free(db_network* net) {
    delete net;
}

db_status db_run_gen_data(const char* config, const char* out_dir) {
    DB_REQUIRE(config, "config");
    DB_REQUIRE(out_dir, "out_dir");
    return guarded([&] { cmd_gen_data(resolved_config(config), out_dir); });
}

db_status db_run_train_teacher(const char* config, const char* out_dir) {
    DB_REQUIRE(config, "config");
    DB_REQUIRE(out_dir, "out_dir");
    return guarded([&] { cmd_train_teacher(resolved_config(config), out_dir); });
}

db_status db_run_distill(const char* config, const char* out_dir) {
    DB_REQUIRE(config, "config");
    DB_REQUIRE(out_dir, "out_dir");
    return guarded([&] { cmd_distill(resolved_config(config), out_dir); });
}

db_status db_run_sweep(const char* config, const char* out_dir) {
    DB_REQUIRE(config, "config");
    DB_REQUIRE(out_dir, "out_dir");
    return guarded([&] { cmd_sweep(resolved_config(config), out_dir); });
}

db_status db_analyze_cka_linear(const char* features_a_csv, const char* features_b_csv,
                                double* cka_out) {
    DB_REQUIRE(features_a_csv, "features_a_csv");
    DB_REQUIRE(features_b_csv, "features_b_csv");
    DB_REQUIRE(cka_out, "cka_out");
    return guarded([&] {
        Dataset a = load_csv(features_a_csv, false);
        Dataset b = load_csv(features_b_csv, false);
        *cka_out = linear_cka(a.x, b.x);
    });
}

db_status db_analyze_cka_rbf(const char* features_a_csv, const char* features_b_csv,
                             double bandwidth_fraction, double* cka_out) {
    DB_REQUIRE(features_a_csv, "features_a_csv");
    DB_REQUIRE(features_b_csv, "features_b_csv");
    DB_REQUIRE(cka_out, "cka_out");
    return guarded([&] {
        Dataset a = load_csv(features_a_csv, false);
        Dataset b = load_csv(features_b_csv, false);
        *cka_out = rbf_cka(a.x, b.x, bandwidth_fraction);
    });
}

db_status db_analyze_ece(const char* logits_csv, int32_t bins, const char* reliability_csv_out,
                         double* ece_out) {
    DB_REQUIRE(logits_csv, "logits_csv");
    return guarded([&] {
        Dataset snap = load_csv(logits_csv, false);
        CalibrationReport report = calibration(snap.x, snap.labels, bins);
        if (reliability_csv_out) {
            write_text_file(reliability_csv_out, reliability_csv(report));
        }
        if (ece_out) {
            *ece_out = report.ece;
        }
    });
}

db_status db_analyze_affinity(const char* student_features_csv, const char* teacher_features_csv,
                              const char* projectors_ckpt, int32_t top_n,
                              const char* affinity_csv_out) {
    DB_REQUIRE(student_features_csv, "student_features_csv");
    DB_REQUIRE(teacher_features_csv, "teacher_features_csv");
    DB_REQUIRE(projectors_ckpt, "projectors_ckpt");
    DB_REQUIRE(affinity_csv_out, "affinity_csv_out");
    return guarded([&] {
        Dataset student = load_csv(student_features_csv, false);
        Dataset teacher = load_csv(teacher_features_csv, false);
        ProjectorEnsemble ensemble = load_ensemble(projectors_ckpt);
        std::vector<Matrix> projected;
        projected.reserve(ensemble.members.size());
        for (const Projector& member : ensemble.members) {
            projected.push_back(project(member, student.x).output());
        }
        AffinityTable table = class_affinity(projected, teacher.x, student.labels, top_n);
        write_text_file(affinity_csv_out, affinity_csv(table));
    });
}

db_status db_analyze_decompose(const char* teacher_logits_csv, const char* student_logits_csv,
                               double mu, const char* decomposition_csv_out, double* tckd_out,
                               double* nckd_out, double* nckd_weight_out) {
    DB_REQUIRE(teacher_logits_csv, "teacher_logits_csv");
    DB_REQUIRE(student_logits_csv, "student_logits_csv");
    return guarded([&] {
        Dataset teacher = load_csv(teacher_logits_csv, false);
        Dataset student = load_csv(student_logits_csv, false);
        if (teacher.labels != student.labels) {
            throw InvalidArgument(
                "decompose: teacher and student snapshots carry different labels");
        }
        DecompositionReport report = tckd_nckd_mean(teacher.x, student.x, teacher.labels, mu);
        if (decomposition_csv_out) {
            std::ostringstream csv;
            csv << "samples,tckd,nckd,nckd_weight,kl,reconstruction,degenerate\n";
            csv << teacher.size() << ',' << format_double(report.tckd) << ','
                << format_double(report.nckd) << ',' << format_double(report.nckd_weight) << ','
                << format_double(report.kl) << ',' << format_double(report.reconstruction) << ','
                << (report.degenerate ? "true" : "false") << '\n';
            write_text_file(decomposition_csv_out, csv.str());
        }
        if (tckd_out) *tckd_out = report.tckd;
        if (nckd_out) *nckd_out = report.nckd;
        if (nckd_weight_out) *nckd_weight_out = report.nckd_weight;
    });
}

} // extern "C"
