#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "distillbench.h"

namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const char* name) {
    fs::path dir = fs::temp_directory_path() / "db_capi" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// Small, fast run shared by the end-to-end cases.
const char* kTeacherConfig =
    "mode=none\n"
    "seed=5\n"
    "epochs=6\n"
    "batch_size=16\n"
    "teacher_hidden=12,8\n"
    "data_classes=3\n"
    "data_dim=5\n"
    "data_per_class=30\n"
    "data_spread=0.35\n";

std::string distill_config(const std::string& teacher_ckpt) {
    return "mode=feature\nseed=5\nepochs=6\nbatch_size=16\nq=2\nalpha=10\n"
           "student_hidden=8\ncka_every=3\n"
           "data_classes=3\ndata_dim=5\ndata_per_class=30\ndata_spread=0.35\n"
           "teacher_ckpt=" +
           teacher_ckpt + "\n";
}

} // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(db_version()) == "1.0.0");
    CHECK(std::string(db_status_name(DB_OK)) == "ok");
    CHECK(std::string(db_status_name(DB_ERR_CONFIG)) == "config_error");
}

TEST_CASE("null arguments are rejected with a message") {
    CHECK(db_dataset_generate(2, 2, 2, 0.5, 1, nullptr) == DB_ERR_NULL_POINTER);
    CHECK(std::string(db_last_error()).find("null argument") != std::string::npos);
    CHECK(db_run_distill(nullptr, "x") == DB_ERR_NULL_POINTER);
}

TEST_CASE("dataset lifecycle through the C API") {
    db_dataset* ds = nullptr;
    REQUIRE(db_dataset_generate(3, 4, 10, 0.3, 7, &ds) == DB_OK);
    int32_t n = 0, dim = 0, classes = 0;
    CHECK(db_dataset_info(ds, &n, &dim, &classes) == DB_OK);
    CHECK(n == 30);
    CHECK(dim == 4);
    CHECK(classes == 3);

    const std::string dir = fresh_dir("dataset");
    const std::string csv = dir + "/data.csv";
    REQUIRE(db_dataset_save_csv(ds, csv.c_str()) == DB_OK);

    db_dataset* loaded = nullptr;
    REQUIRE(db_dataset_load_csv(csv.c_str(), 0, &loaded) == DB_OK);
    CHECK(db_dataset_info(loaded, &n, &dim, &classes) == DB_OK);
    CHECK(n == 30);

    db_dataset* train = nullptr;
    db_dataset* test = nullptr;
    REQUIRE(db_dataset_split(loaded, 0.5, 9, &train, &test) == DB_OK);
    CHECK(db_dataset_info(train, &n, nullptr, nullptr) == DB_OK);
    CHECK(n == 15);

    CHECK(db_dataset_generate(0, 4, 10, 0.3, 7, &ds) == DB_ERR_INVALID_ARGUMENT);

    db_dataset_free(ds);
    db_dataset_free(loaded);
    db_dataset_free(train);
    db_dataset_free(test);
}

TEST_CASE("missing files map to IO / parse errors") {
    db_network* net = nullptr;
    CHECK(db_network_load("/nonexistent/teacher.ckpt", &net) == DB_ERR_IO);
    CHECK(std::string(db_last_error()).find("cannot open") != std::string::npos);
    db_dataset* ds = nullptr;
    CHECK(db_dataset_load_csv("/nonexistent/data.csv", 0, &ds) == DB_ERR_IO);
}

TEST_CASE("config problems come back as DB_ERR_CONFIG listing the keys") {
    const std::string dir = fresh_dir("badconfig");
    CHECK(db_run_distill("alpha=-2\nbogus_key=1\n", dir.c_str()) == DB_ERR_CONFIG);
    const std::string msg = db_last_error();
    CHECK(msg.find("alpha") != std::string::npos);
    CHECK(msg.find("bogus_key") != std::string::npos);

    // Missing teacher checkpoint is caught before any training.
    CHECK(db_run_distill("teacher_ckpt=/nonexistent.ckpt\n", dir.c_str()) == DB_ERR_CONFIG);
}

TEST_CASE("teacher + distill end-to-end with manifest replay determinism") {
    const std::string tdir = fresh_dir("teacher");
    REQUIRE(db_run_train_teacher(kTeacherConfig, tdir.c_str()) == DB_OK);
    CHECK(fs::exists(tdir + "/teacher.ckpt"));
    CHECK(fs::exists(tdir + "/train_log.csv"));
    CHECK(fs::exists(tdir + "/manifest.txt"));
    CHECK(fs::exists(tdir + "/teacher_train_features.csv"));

    const std::string cfg = distill_config(tdir + "/teacher.ckpt");
    const std::string d1 = fresh_dir("distill1");
    const std::string d2 = fresh_dir("distill2");
    REQUIRE(db_run_distill(cfg.c_str(), d1.c_str()) == DB_OK);
    CHECK(fs::exists(d1 + "/student.ckpt"));
    CHECK(fs::exists(d1 + "/projectors.ckpt"));
    CHECK(fs::exists(d1 + "/cka_series.csv"));

    // Replaying the manifest bitwise-reproduces the run.
    const std::string manifest = slurp(d1 + "/manifest.txt");
    REQUIRE(db_run_distill(manifest.c_str(), d2.c_str()) == DB_OK);
    CHECK(slurp(d1 + "/train_log.csv") == slurp(d2 + "/train_log.csv"));
    CHECK(slurp(d1 + "/student.ckpt") == slurp(d2 + "/student.ckpt"));
    CHECK(slurp(d1 + "/cka_series.csv") == slurp(d2 + "/cka_series.csv"));

    // Loaded student evaluates and snapshots through the handle API.
    db_network* student = nullptr;
    REQUIRE(db_network_load((d1 + "/student.ckpt").c_str(), &student) == DB_OK);
    db_dataset* data = nullptr;
    REQUIRE(db_dataset_load_csv((d1 + "/student_test_logits.csv").c_str(), 0, &data) == DB_OK);
    db_dataset_free(data);

    db_dataset* full = nullptr;
    REQUIRE(db_dataset_generate(3, 5, 30, 0.35, 5, &full) == DB_OK);
    double acc = 0.0;
    REQUIRE(db_network_evaluate(student, full, &acc) == DB_OK);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    const std::string snap = fresh_dir("snap");
    REQUIRE(db_network_snapshot(student, full, (snap + "/f.csv").c_str(),
                                (snap + "/l.csv").c_str()) == DB_OK);
    CHECK(fs::exists(snap + "/f.csv"));

    db_network_free(student);
    db_dataset_free(full);
}

TEST_CASE("sweep through the C API") {
    const std::string tdir = fresh_dir("sweep_teacher");
    REQUIRE(db_run_train_teacher(kTeacherConfig, tdir.c_str()) == DB_OK);
    std::string cfg = distill_config(tdir + "/teacher.ckpt");
    cfg += "sweep_axis=q\nsweep_values=1,2\nepochs=3\n";
    // distill_config already sets epochs; drop the duplicate line.
    cfg.replace(cfg.find("epochs=6\n"), 9, "");
    const std::string sdir = fresh_dir("sweep");
    REQUIRE(db_run_sweep(cfg.c_str(), sdir.c_str()) == DB_OK);
    CHECK(fs::exists(sdir + "/sweep.csv"));
    CHECK(fs::exists(sdir + "/q_1/student.ckpt"));
    CHECK(fs::exists(sdir + "/q_2/student.ckpt"));
    const std::string table = slurp(sdir + "/sweep.csv");
    CHECK(table.rfind("axis_value,final_train_acc,final_test_acc\n", 0) == 0);
}

TEST_CASE("analysis entry points work on snapshot files") {
    const std::string dir = fresh_dir("analysis");

    // Identical feature snapshots give CKA 1.
    db_dataset* ds = nullptr;
    REQUIRE(db_dataset_generate(3, 4, 8, 0.5, 11, &ds) == DB_OK);
    const std::string feats = dir + "/features.csv";
    REQUIRE(db_dataset_save_csv(ds, feats.c_str()) == DB_OK);
    double cka = 0.0;
    REQUIRE(db_analyze_cka_linear(feats.c_str(), feats.c_str(), &cka) == DB_OK);
    CHECK(std::fabs(cka - 1.0) < 1e-12);
    REQUIRE(db_analyze_cka_rbf(feats.c_str(), feats.c_str(), 0.5, &cka) == DB_OK);
    CHECK(std::fabs(cka - 1.0) < 1e-12);
    db_dataset_free(ds);

    // The hand-evaluated two-sample ECE case through the file interface.
    char buf[256];
    const double l9 = std::log(0.9 / (1.0 - 0.9));
    std::snprintf(buf, sizeof(buf), "%.17g,0,0\n%.17g,0,1\n", l9, l9);
    const std::string logits = dir + "/logits.csv";
    spit(logits, buf);
    double ece = 0.0;
    REQUIRE(db_analyze_ece(logits.c_str(), 10, (dir + "/reliability.csv").c_str(), &ece) ==
            DB_OK);
    CHECK(std::fabs(ece - 0.4) < 1e-14);
    const std::string rel = slurp(dir + "/reliability.csv");
    CHECK(rel.rfind("bin_lo,bin_hi,count,accuracy,confidence\n", 0) == 0);

    // Decompose with mismatched labels is rejected.
    spit(dir + "/t.csv", "1,0,0\n0,1,1\n");
    spit(dir + "/s.csv", "1,0,0\n0,1,0\n");
    CHECK(db_analyze_decompose((dir + "/t.csv").c_str(), (dir + "/s.csv").c_str(), 4.0, nullptr,
                               nullptr, nullptr, nullptr) == DB_ERR_INVALID_ARGUMENT);

    // Matching logits decompose to zero.
    double tckd = 1.0, nckd = 1.0, weight = 0.0;
    REQUIRE(db_analyze_decompose((dir + "/t.csv").c_str(), (dir + "/t.csv").c_str(), 4.0,
                                 (dir + "/dec.csv").c_str(), &tckd, &nckd, &weight) == DB_OK);
    CHECK(std::fabs(tckd) < 1e-14);
    CHECK(std::fabs(nckd) < 1e-14);
    CHECK(slurp(dir + "/dec.csv").rfind("samples,tckd,nckd,nckd_weight,kl,", 0) == 0);
}

TEST_CASE("affinity through the C API") {
    // Build a tiny run to obtain a projectors sidecar, then rank classes.
    const std::string tdir = fresh_dir("aff_teacher");
    REQUIRE(db_run_train_teacher(kTeacherConfig, tdir.c_str()) == DB_OK);
    const std::string cfg = distill_config(tdir + "/teacher.ckpt");
    const std::string ddir = fresh_dir("aff_distill");
    REQUIRE(db_run_distill(cfg.c_str(), ddir.c_str()) == DB_OK);

    const std::string out = ddir + "/affinity.csv";
    REQUIRE(db_analyze_affinity((ddir + "/student_train_features.csv").c_str(),
                                (ddir + "/teacher_train_features.csv").c_str(),
                                (ddir + "/projectors.ckpt").c_str(), 2, out.c_str()) == DB_OK);
    const std::string table = slurp(out);
    CHECK(table.rfind("projector,rank,class,cosine\n", 0) == 0);
    // Two projectors (q=2), two rows each.
    CHECK(std::count(table.begin(), table.end(), '\n') == 5);
}
