/*
 * distillbench C API.
 *
 * Everything the library can do is reachable through this header: datasets,
 * network checkpoints, full experiment runs, and the analysis battery.
 * All functions return db_status; on failure db_last_error() carries a
 * human-readable message (thread-local, valid until the next failing call on
 * the same thread). Objects returned through out-parameters are owned by the
 * caller and released with the matching _free function.
 *
 * Run configs are flat key=value text, one pair per line ('#' comments
 * allowed) — the same schema the library writes to manifest.txt, so a
 * manifest can be replayed verbatim.
 */
#ifndef DISTILLBENCH_H
#define DISTILLBENCH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define DB_API

typedef enum db_status {
    DB_OK = 0,
    DB_ERR_INVALID_ARGUMENT = 1,
    DB_ERR_DIMENSION = 2,
    DB_ERR_PARSE = 3,
    DB_ERR_CONFIG = 4,
    DB_ERR_NUMERIC = 5,
    DB_ERR_DEGENERATE = 6,
    DB_ERR_IO = 7,
    DB_ERR_NULL_POINTER = 8,
    DB_ERR_UNKNOWN = 9
} db_status;

DB_API const char* db_status_name(db_status status);
DB_API const char* db_version(void);

/* Message from the most recent failing call on this thread; never NULL. */
DB_API const char* db_last_error(void);

/* -------------------------------------------------------------- datasets */

typedef struct db_dataset db_dataset;

DB_API db_status db_dataset_generate(int32_t classes, int32_t dim, int32_t per_class,
                                     double spread, uint64_t seed, db_dataset** out);
DB_API db_status db_dataset_load_csv(const char* path, int32_t has_header, db_dataset** out);
DB_API db_status db_dataset_save_csv(const db_dataset* ds, const char* path);
DB_API db_status db_dataset_split(const db_dataset* ds, double train_fraction, uint64_t seed,
                                  db_dataset** train_out, db_dataset** test_out);
DB_API db_status db_dataset_info(const db_dataset* ds, int32_t* samples, int32_t* dim,
                                 int32_t* classes);
DB_API void db_dataset_free(db_dataset* ds);

/* -------------------------------------------------------------- networks */

typedef struct db_network db_network;

DB_API db_status db_network_load(const char* path, db_network** out);
DB_API db_status db_network_save(const db_network* net, const char* path);
DB_API db_status db_network_evaluate(const db_network* net, const db_dataset* ds,
                                     double* accuracy_out);
/* Writes feature and/or logits snapshots (rows = samples, last column is the
 * ground-truth label). Either path may be NULL to skip that snapshot. */
DB_API db_status db_network_snapshot(const db_network* net, const db_dataset* ds,
                                     const char* features_csv, const char* logits_csv);
DB_API void db_network_free(db_network* net);

/* ------------------------------------------------------------------ runs */
/* config: key=value text (see header comment). Artifacts, including
 * manifest.txt, are written under out_dir. */

DB_API db_status db_run_gen_data(const char* config, const char* out_dir);
DB_API db_status db_run_train_teacher(const char* config, const char* out_dir);
DB_API db_status db_run_distill(const char* config, const char* out_dir);
DB_API db_status db_run_sweep(const char* config, const char* out_dir);

/* -------------------------------------------------------------- analysis */
/* Snapshot CSV arguments use the db_network_snapshot layout. */

DB_API db_status db_analyze_cka_linear(const char* features_a_csv, const char* features_b_csv,
                                       double* cka_out);
DB_API db_status db_analyze_cka_rbf(const char* features_a_csv, const char* features_b_csv,
                                    double bandwidth_fraction, double* cka_out);

/* reliability_csv_out may be NULL to skip the per-bin export. */
DB_API db_status db_analyze_ece(const char* logits_csv, int32_t bins,
                                const char* reliability_csv_out, double* ece_out);

/* Projects the student features through every member of the saved ensemble
 * and writes the per-projector class affinity ranking. */
DB_API db_status db_analyze_affinity(const char* student_features_csv,
                                     const char* teacher_features_csv,
                                     const char* projectors_ckpt, int32_t top_n,
                                     const char* affinity_csv_out);

/* Batch-mean decomposition of the soft-target loss at temperature mu into
 * target-class and non-target-class parts. Any out-pointer and the CSV path
 * may be NULL. */
DB_API db_status db_analyze_decompose(const char* teacher_logits_csv,
                                      const char* student_logits_csv, double mu,
                                      const char* decomposition_csv_out, double* tckd_out,
                                      double* nckd_out, double* nckd_weight_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DISTILLBENCH_H */
