#include "doctest.h"

#include <cmath>
#include <numeric>

#include "distillbench/checkpoint.hpp"
#include "distillbench/errors.hpp"
#include "distillbench/losses.hpp"
#include "distillbench/trainer.hpp"

using namespace distillbench;

namespace {

DistillConfig small_config(Mode mode, int epochs, std::uint64_t seed) {
    DistillConfig cfg;
    cfg.mode = mode;
    cfg.epochs = epochs;
    cfg.seed = seed;
    cfg.batch_size = 16;
    cfg.lr = 0.05;
    cfg.momentum = 0.9;
    cfg.weight_decay = 0.0005;
    cfg.alpha = 10.0;
    cfg.q = 2;
    return cfg;
}

struct SmallWorld {
    Dataset train;
    Dataset test;
    Network teacher;
};

// A compact teacher/student playground: 3 classes, 6 dims, modest spread.
SmallWorld make_world(std::uint64_t seed, int teacher_epochs = 30) {
    Dataset full = gen_gaussian_mixture(3, 6, 40, 0.35, seed);
    auto [train_set, test_set] = split(full, 0.75, seed + 1);
    DistillConfig tcfg = small_config(Mode::None, teacher_epochs, seed);
    TrainResult teacher = train_teacher({16, 8}, Activation::Relu, train_set, test_set, tcfg);
    return {std::move(train_set), std::move(test_set), std::move(teacher.net)};
}

std::vector<Matrix> snapshot_weights(const Network& net) {
    std::vector<Matrix> out;
    for (const Layer& layer : net.layers()) out.push_back(layer.weight);
    return out;
}

} // namespace

TEST_CASE("lr schedule: lr after k drops is exactly lr0 * factor^k") {
    DistillConfig cfg;
    cfg.lr = 0.05;
    cfg.lr_drop_factor = 0.1;
    cfg.lr_drop_epochs = {4, 8, 9};
    CHECK(lr_at_epoch(cfg, 1) == 0.05);
    CHECK(lr_at_epoch(cfg, 3) == 0.05);
    CHECK(lr_at_epoch(cfg, 4) == 0.05 * std::pow(0.1, 1));
    CHECK(lr_at_epoch(cfg, 8) == 0.05 * std::pow(0.1, 2));
    CHECK(lr_at_epoch(cfg, 20) == 0.05 * std::pow(0.1, 3));
}

TEST_CASE("train_teacher fits a linearly separable two-class set") {
    Dataset full = gen_gaussian_mixture(2, 4, 40, 0.05, 3);
    auto [train_set, test_set] = split(full, 0.8, 4);
    DistillConfig cfg = small_config(Mode::None, 50, 3);
    TrainResult result = train_teacher({8}, Activation::Relu, train_set, test_set, cfg);
    CHECK(result.log.rows.back().train_acc >= 0.99);
}

TEST_CASE("train_teacher: fixed seed reproduces the TrainLog bitwise") {
    Dataset full = gen_gaussian_mixture(3, 4, 20, 0.3, 8);
    auto [train_set, test_set] = split(full, 0.75, 9);
    DistillConfig cfg = small_config(Mode::None, 10, 8);
    TrainResult a = train_teacher({8}, Activation::Relu, train_set, test_set, cfg);
    TrainResult b = train_teacher({8}, Activation::Relu, train_set, test_set, cfg);
    CHECK(train_log_csv(a.log) == train_log_csv(b.log));
    for (std::size_t i = 0; i < a.net.layers().size(); ++i) {
        CHECK(a.net.layers()[i].weight == b.net.layers()[i].weight);
    }
}

TEST_CASE("train_teacher with zero epochs returns the initialized net and empty log") {
    Dataset full = gen_gaussian_mixture(2, 3, 10, 0.3, 5);
    auto [train_set, test_set] = split(full, 0.5, 6);
    DistillConfig cfg = small_config(Mode::None, 0, 5);
    TrainResult result = train_teacher({4}, Activation::Relu, train_set, test_set, cfg);
    CHECK(result.log.rows.empty());
    Network fresh(mlp_specs(3, {4}, Activation::Relu, 2), 5);
    for (std::size_t i = 0; i < fresh.layers().size(); ++i) {
        CHECK(result.net.layers()[i].weight == fresh.layers()[i].weight);
    }
}

TEST_CASE("train_teacher requires mode none, distill requires a distillation mode") {
    Dataset full = gen_gaussian_mixture(2, 3, 10, 0.3, 5);
    auto [train_set, test_set] = split(full, 0.5, 6);
    DistillConfig cfg = small_config(Mode::Feature, 1, 5);
    CHECK_THROWS_AS(train_teacher({4}, Activation::Relu, train_set, test_set, cfg),
                    InvalidArgument);
    SmallWorld world = make_world(40, 5);
    DistillConfig none = small_config(Mode::None, 1, 40);
    CHECK_THROWS_AS(distill(world.teacher, {8}, Activation::Relu, world.train, world.test, none),
                    InvalidArgument);
}

TEST_CASE("evaluate is deterministic and matches an argmax recount") {
    SmallWorld world = make_world(11, 10);
    EvalResult a = evaluate(world.teacher, world.test);
    EvalResult b = evaluate(world.teacher, world.test);
    CHECK(a.logits == b.logits);
    CHECK(a.features == b.features);

    int correct = 0;
    for (int c = 0; c < a.logits.cols(); ++c) {
        int arg = 0;
        for (int r = 1; r < a.logits.rows(); ++r) {
            if (a.logits.at(r, c) > a.logits.at(arg, c)) arg = r;
        }
        correct += arg == world.test.labels[c] ? 1 : 0;
    }
    CHECK(a.accuracy == static_cast<double>(correct) / world.test.size());
}

TEST_CASE("distill leaves the teacher bitwise unchanged") {
    SmallWorld world = make_world(13, 10);
    std::vector<Matrix> before = snapshot_weights(world.teacher);
    DistillConfig cfg = small_config(Mode::Feature, 5, 13);
    distill(world.teacher, {8}, Activation::Relu, world.train, world.test, cfg);
    std::vector<Matrix> after = snapshot_weights(world.teacher);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(before[i] == after[i]);
    }
}

TEST_CASE("distill with alpha=0 reproduces CE-only training bitwise") {
    SmallWorld world = make_world(17, 10);
    DistillConfig cfg = small_config(Mode::Feature, 8, 17);
    cfg.alpha = 0.0;
    DistillResult with_head =
        distill(world.teacher, {8}, Activation::Relu, world.train, world.test, cfg);
    DistillConfig plain = cfg;
    plain.mode = Mode::None;
    TrainResult baseline =
        train_teacher({8}, Activation::Relu, world.train, world.test, plain);
    for (std::size_t i = 0; i < baseline.net.layers().size(); ++i) {
        CHECK(with_head.student.layers()[i].weight == baseline.net.layers()[i].weight);
        CHECK(with_head.student.layers()[i].bias == baseline.net.layers()[i].bias);
    }
}

TEST_CASE("es_epoch zeroes the logged distillation term afterwards") {
    SmallWorld world = make_world(19, 10);
    DistillConfig cfg = small_config(Mode::Feature, 8, 19);
    cfg.es_epoch = 4;
    DistillResult result =
        distill(world.teacher, {8}, Activation::Relu, world.train, world.test, cfg);
    for (const TrainLogRow& row : result.log.rows) {
        if (row.epoch <= 4) {
            CHECK(row.distill > 0.0);
        } else {
            CHECK(row.distill == 0.0);
            CHECK(row.total == row.ce);
        }
    }
}

TEST_CASE("every epoch's total equals the recomputed sum of its components") {
    SmallWorld world = make_world(23, 10);
    for (Mode mode : {Mode::Feature, Mode::FeatureNoproj, Mode::Logit, Mode::LogitProj}) {
        DistillConfig cfg = small_config(mode, 6, 23);
        std::vector<int> hidden =
            mode == Mode::FeatureNoproj ? std::vector<int>{8, 8} : std::vector<int>{8};
        DistillResult result =
            distill(world.teacher, hidden, Activation::Relu, world.train, world.test, cfg);
        for (const TrainLogRow& row : result.log.rows) {
            const double recomputed = mode == Mode::Feature || mode == Mode::FeatureNoproj
                                          ? row.ce + cfg.alpha * row.distill
                                          : cfg.beta * row.ce + (1.0 - cfg.beta) * row.distill;
            CHECK(std::fabs(row.total - recomputed) < 1e-9);
        }
    }
}

TEST_CASE("feature_noproj requires matching feature dimensions") {
    SmallWorld world = make_world(29, 5);
    DistillConfig cfg = small_config(Mode::FeatureNoproj, 2, 29);
    CHECK_THROWS_WITH_AS(
        distill(world.teacher, {12}, Activation::Relu, world.train, world.test, cfg),
        doctest::Contains("feature_noproj"), DimensionError);
}

TEST_CASE("q=1 feature mode matches a dedicated single-projector training path") {
    SmallWorld world = make_world(31, 10);
    DistillConfig cfg = small_config(Mode::Feature, 6, 31);
    cfg.q = 1;
    DistillResult ensemble_run =
        distill(world.teacher, {8}, Activation::Relu, world.train, world.test, cfg);

    // Independent single-projector loop: same streams, projector math written
    // against the plain Projector API instead of the ensemble.
    Network student(mlp_specs(world.train.dim(), {8}, Activation::Relu, 3), cfg.seed);
    SeededRng prng(cfg.seed + kProjSeedOffset);
    Projector proj = make_projector(cfg.proj_arch, student.feature_dim(),
                                    world.teacher.feature_dim(), cfg.proj_activation,
                                    InitStrategy::FanInUniform, prng);
    EvalResult teval = evaluate(world.teacher, world.train);

    NetSgdState state = make_sgd_state(student);
    Matrix proj_velocity(proj.layers[0].weight.rows(), proj.layers[0].weight.cols());
    SeededRng shuffle_rng(cfg.seed + kShuffleSeedOffset);
    std::vector<int> order(world.train.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> totals;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = lr_at_epoch(cfg, epoch);
        shuffle_rng.shuffle(order);
        double total_sum = 0.0;
        for (int start = 0; start < world.train.size(); start += cfg.batch_size) {
            const int stop = std::min<int>(start + cfg.batch_size, world.train.size());
            std::vector<int> idx(order.begin() + start, order.begin() + stop);
            Matrix xb = columns(world.train.x, idx);
            std::vector<int> yb;
            for (int i : idx) yb.push_back(world.train.labels[i]);
            Matrix tb = columns(teval.features, idx);

            ForwardPass pass = forward(student, xb);
            LossValue ce = ce_loss(pass.logits, yb);
            ProjectorPass ppass = project(proj, pass.features);
            LossValue da = da_loss(ppass.output(), tb);
            total_sum += (ce.value + cfg.alpha * da.value) * (stop - start);

            ProjectorGradients pgrads =
                project_backward(proj, ppass, scale(da.grad("features"), cfg.alpha));
            NetGradients grads = backward(student, pass, ce.grad("logits"), pgrads.input);
            sgd_update(student, grads, state, {lr, cfg.momentum, cfg.weight_decay});
            sgd_step(proj.layers[0].weight, pgrads.weight[0], proj_velocity,
                     {lr, cfg.momentum, cfg.weight_decay});
            ++proj.version;
        }
        totals.push_back(total_sum / world.train.size());
    }

    REQUIRE(totals.size() == ensemble_run.log.rows.size());
    for (std::size_t i = 0; i < totals.size(); ++i) {
        CHECK(std::fabs(totals[i] - ensemble_run.log.rows[i].total) < 1e-12);
    }
}

TEST_CASE("logit_proj with the projector frozen at identity matches plain logit mode") {
    SmallWorld world = make_world(37, 10);
    DistillConfig frozen = small_config(Mode::LogitProj, 6, 37);
    frozen.freeze_logit_proj = true;
    DistillResult a =
        distill(world.teacher, {8}, Activation::Relu, world.train, world.test, frozen);
    DistillConfig plain = small_config(Mode::Logit, 6, 37);
    DistillResult b =
        distill(world.teacher, {8}, Activation::Relu, world.train, world.test, plain);
    REQUIRE(a.log.rows.size() == b.log.rows.size());
    for (std::size_t i = 0; i < a.log.rows.size(); ++i) {
        CHECK(std::fabs(a.log.rows[i].total - b.log.rows[i].total) < 1e-12);
        CHECK(std::fabs(a.log.rows[i].ce - b.log.rows[i].ce) < 1e-12);
    }
}

TEST_CASE("distill aborts with the epoch index when the loss diverges") {
    SmallWorld world = make_world(41, 5);
    DistillConfig cfg = small_config(Mode::Feature, 10, 41);
    cfg.lr = 1e9;
    cfg.momentum = 0.0;
    CHECK_THROWS_WITH_AS(
        distill(world.teacher, {8}, Activation::Relu, world.train, world.test, cfg),
        doctest::Contains("epoch"), NumericError);
}

TEST_CASE("cka tracking fills the log column and the series") {
    SmallWorld world = make_world(43, 10);
    DistillConfig cfg = small_config(Mode::Feature, 6, 43);
    cfg.cka_every = 2;
    DistillResult result =
        distill(world.teacher, {8}, Activation::Relu, world.train, world.test, cfg);
    CHECK(result.cka_series.values.size() == 3);
    for (const TrainLogRow& row : result.log.rows) {
        CHECK(row.has_cka == (row.epoch % 2 == 0));
        if (row.has_cka) {
            CHECK(row.cka >= 0.0);
            CHECK(row.cka <= 1.0 + 1e-9);
        }
    }
    const std::string csv = train_log_csv(result.log);
    CHECK(csv.rfind("epoch,train_acc,test_acc,ce,distill,total,cka\n", 0) == 0);
}

TEST_CASE("run_sweep: alpha=0 row matches the CE-only baseline") {
    SmallWorld world = make_world(47, 10);
    RunConfig base;
    base.train = small_config(Mode::FeatureNoproj, 6, 47);
    base.student_hidden = {8, 8}; // d == m
    SweepTable table = run_sweep(world.teacher, base, "alpha", {"0", "5", "25"},
                                 world.train, world.test);
    REQUIRE(table.rows.size() == 3);

    DistillConfig plain = base.train;
    plain.mode = Mode::None;
    TrainResult baseline =
        train_teacher({8, 8}, Activation::Relu, world.train, world.test, plain);
    CHECK(table.rows[0].final_train_acc == baseline.log.rows.back().train_acc);
    CHECK(table.rows[0].final_test_acc == baseline.log.rows.back().test_acc);

    SweepTable again = run_sweep(world.teacher, base, "alpha", {"0", "5", "25"},
                                 world.train, world.test);
    CHECK(sweep_csv(table) == sweep_csv(again));
}

TEST_CASE("run_sweep: q axis mirrors the projector-count ablation") {
    SmallWorld world = make_world(53, 8);
    RunConfig base;
    base.train = small_config(Mode::Feature, 4, 53);
    base.student_hidden = {8};
    SweepTable table =
        run_sweep(world.teacher, base, "q", {"1", "2", "3", "4"}, world.train, world.test);
    CHECK(table.rows.size() == 4);
    CHECK(sweep_csv(table).rfind("axis_value,final_train_acc,final_test_acc\n", 0) == 0);
    CHECK_THROWS_AS(run_sweep(world.teacher, base, "q", {}, world.train, world.test),
                    InvalidArgument);
    CHECK_THROWS_AS(run_sweep(world.teacher, base, "bogus", {"1"}, world.train, world.test),
                    InvalidArgument);
}

TEST_CASE("distill validates teacher/dataset agreement") {
    SmallWorld world = make_world(59, 5);
    Dataset other = gen_gaussian_mixture(3, 9, 10, 0.3, 2);
    auto [otrain, otest] = split(other, 0.5, 3);
    DistillConfig cfg = small_config(Mode::Feature, 2, 59);
    CHECK_THROWS_AS(distill(world.teacher, {8}, Activation::Relu, otrain, otest, cfg),
                    DimensionError);
}
