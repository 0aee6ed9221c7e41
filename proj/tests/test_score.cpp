#include <catch2/catch_amalgamated.hpp>

#include "sinodiff/score.hpp"
#include "test_util.hpp"

using namespace sinodiff;

namespace {

PatchTensor gaussian_patches(int count, int rows, int cols, double mean, double sd, Rng& rng) {
    PatchTensor t;
    t.patch_rows = rows;
    t.patch_cols = cols;
    for (int i = 0; i < count; ++i) {
        MatRM p(rows, cols);
        for (Index r = 0; r < rows; ++r)
            for (Index c = 0; c < cols; ++c) p(r, c) = mean + sd * rng.normal();
        t.patches.push_back(std::move(p));
        t.origins.push_back(0);
    }
    return t;
}

ScoreModel zero_net_model(int patch_rows, int window, int hidden) {
    ScoreModel m;
    m.kind       = ScoreModel::Kind::TrainableNet;
    m.patch_rows = patch_rows;
    m.patch_cols = window * window;
    m.window     = window;
    m.schedule   = make_schedule(5, 0.01, 1.0);
    m.net        = ScoreNet(patch_rows * window * window, hidden);
    return m;  // parameters stay zero
}

}  // namespace

TEST_CASE("geometric schedule hits its endpoints", "[score]") {
    const SigmaSchedule two = make_schedule(2, 0.01, 1.0);
    REQUIRE(two.levels == std::vector<double>{1.0, 0.01});

    const SigmaSchedule three = make_schedule(3, 0.01, 1.0);
    REQUIRE(three.levels[0] == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(three.levels[1] == Catch::Approx(0.1).epsilon(1e-12));
    REQUIRE(three.levels[2] == Catch::Approx(0.01).margin(1e-15));

    REQUIRE(make_schedule(1, 0.01, 1.0).levels == std::vector<double>{1.0});
    REQUIRE_THROWS_AS(make_schedule(3, 1.0, 0.5), std::invalid_argument);

    // annealing index: sigma(0) is the smallest level
    REQUIRE(three.sigma(0) == Catch::Approx(0.01));
    REQUIRE(three.sigma(2) == Catch::Approx(1.0));
}

TEST_CASE("zero model DSM loss equals the patch dimension", "[score]") {
    // sigma^2 E||z/sigma||^2 = d = 4096, empirical mean over 1e3 draws
    Rng rng(1);
    const ScoreModel m    = zero_net_model(64, 8, 4);
    const PatchTensor t   = gaussian_patches(1000, 64, 64, 0.5, 0.1, rng);
    for (double sigma : {0.05, 0.4}) {
        const double loss = dsm_loss(m, t, sigma, 7);
        REQUIRE(loss == Catch::Approx(4096.0).epsilon(0.05));
    }
}

TEST_CASE("analytic gaussian score is the closed form", "[score]") {
    Rng rng(2);
    MatRM mean(6, 4);
    for (Index i = 0; i < mean.size(); ++i) mean.data()[i] = rng.normal();
    const double v          = 0.3;
    const ScoreModel m      = make_analytic_gaussian(mean, v, 2, make_schedule(3, 0.1, 1.0));
    MatRM patch             = mean;
    patch.array() += 0.25;
    const double sigma = 0.5;
    const MatRM s      = score_eval(m, patch, sigma);
    const MatRM expect = -(patch - mean) / (v + sigma * sigma);
    REQUIRE((s - expect).cwiseAbs().maxCoeff() <= 1e-14);
    // zero field at the mean
    REQUIRE(score_eval(m, mean, sigma).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("true score beats the zero model and shifted scores on shared draws", "[score]") {
    Rng rng(3);
    const double v = 0.04, sigma = 0.3;
    MatRM mean(64, 4);
    for (Index i = 0; i < mean.size(); ++i) mean.data()[i] = 0.5 + 0.2 * rng.normal();
    const ScoreModel truth = make_analytic_gaussian(mean, v, 2, make_schedule(3, 0.1, 1.0));
    const ScoreModel zero  = zero_net_model(64, 2, 4);

    // data drawn from the model's own gaussian
    PatchTensor data;
    data.patch_rows = 64;
    data.patch_cols = 4;
    for (int i = 0; i < 1000; ++i) {
        MatRM p = mean;
        for (Index j = 0; j < p.size(); ++j) p.data()[j] += std::sqrt(v) * rng.normal();
        data.patches.push_back(std::move(p));
        data.origins.push_back(0);
    }

    const std::uint64_t seed = 11;  // shared noise draws
    const double loss_true   = dsm_loss(truth, data, sigma, seed);
    const double loss_zero   = dsm_loss(zero, data, sigma, seed);
    REQUIRE(loss_true <= loss_zero);

    // score + constant field c == analytic model with mean shifted by c*(v+sigma^2)
    MatRM shifted = mean;
    shifted.array() += 0.1 * (v + sigma * sigma);
    const ScoreModel pert = make_analytic_gaussian(shifted, v, 2, truth.schedule);
    REQUIRE(loss_true <= dsm_loss(pert, data, sigma, seed));
}

TEST_CASE("dsm loss is seed deterministic", "[score]") {
    Rng rng(4);
    const ScoreModel m  = zero_net_model(8, 2, 4);
    const PatchTensor t = gaussian_patches(16, 8, 4, 0.0, 1.0, rng);
    REQUIRE(dsm_loss(m, t, 0.2, 42) == dsm_loss(m, t, 0.2, 42));
    REQUIRE(dsm_loss(m, t, 0.2, 42) != dsm_loss(m, t, 0.2, 43));
}

TEST_CASE("training-path gradient matches central differences on a small net", "[score]") {
    Rng rng(5);
    ScoreNet net(16, 8);  // 4x4 patches, window 2
    net.init_kaiming(rng);

    Eigen::MatrixXd p0(1, 16), z(1, 16);
    for (Index i = 0; i < 16; ++i) {
        p0(0, i) = rng.normal();
        z(0, i)  = rng.normal();
    }
    const double sigma = 0.37;
    Eigen::VectorXd grad;
    net.loss_and_grad(p0, z, sigma, grad);

    Rng pick(6);
    for (int k = 0; k < 10; ++k) {
        const Index i  = static_cast<Index>(pick.below(std::uint64_t(net.param_count())));
        const double h = 1e-5;
        Eigen::VectorXd dummy;
        const double saved = net.params()[i];
        net.params()[i]    = saved + h;
        const double up    = net.loss_and_grad(p0, z, sigma, dummy);
        net.params()[i]    = saved - h;
        const double down  = net.loss_and_grad(p0, z, sigma, dummy);
        net.params()[i]    = saved;
        const double fd    = (up - down) / (2.0 * h);
        const double denom = std::max(std::abs(fd), 1e-8);
        CAPTURE(i, fd, grad[i]);
        REQUIRE(std::abs(grad[i] - fd) / denom <= 1e-4);
    }
}

TEST_CASE("gradient check holds at the reference architecture", "[score]") {
    Rng rng(7);
    ScoreNet net(4096, 512);
    net.init_kaiming(rng);
    Eigen::MatrixXd p0(1, 4096), z(1, 4096);
    for (Index i = 0; i < 4096; ++i) {
        p0(0, i) = 0.5 + 0.1 * rng.normal();
        z(0, i)  = rng.normal();
    }
    Eigen::VectorXd grad;
    net.loss_and_grad(p0, z, 0.2, grad);
    Rng pick(8);
    for (int k = 0; k < 3; ++k) {
        const Index i  = static_cast<Index>(pick.below(std::uint64_t(net.param_count())));
        const double h = 1e-5;
        Eigen::VectorXd dummy;
        const double saved = net.params()[i];
        net.params()[i]    = saved + h;
        const double up    = net.loss_and_grad(p0, z, 0.2, dummy);
        net.params()[i]    = saved - h;
        const double down  = net.loss_and_grad(p0, z, 0.2, dummy);
        net.params()[i]    = saved;
        const double fd    = (up - down) / (2.0 * h);
        REQUIRE(std::abs(grad[i] - fd) / std::max(std::abs(fd), 1e-8) <= 1e-4);
    }
}

TEST_CASE("training is bit-deterministic in the seed", "[score]") {
    Rng rng(9);
    Sinogram shot(24, 24);
    shot.values = testutil::random_array(24, 24, rng, 0.1, 1.0);

    TrainConfig cfg;
    cfg.total_steps       = 25;
    cfg.batch_size        = 4;
    cfg.hidden_dim        = 16;
    cfg.patches_per_epoch = 32;
    cfg.seed              = 1234;
    const SigmaSchedule sched = make_schedule(5, 0.05, 1.0);

    const auto a = train({shot}, cfg, sched, 2, 8);
    const auto b = train({shot}, cfg, sched, 2, 8);
    for (int p = 0; p < 3; ++p)
        REQUIRE((a[p].net.params().array() == b[p].net.params().array()).all());

    cfg.seed     = 999;
    const auto c = train({shot}, cfg, sched, 2, 8);
    REQUIRE_FALSE((a[0].net.params().array() == c[0].net.params().array()).all());
}

TEST_CASE("zero training steps leaves usable initialized models", "[score]") {
    Rng rng(10);
    Sinogram shot(24, 24);
    shot.values = testutil::random_array(24, 24, rng, 0.1, 1.0);
    TrainConfig cfg;
    cfg.total_steps = 0;
    cfg.hidden_dim  = 16;
    const auto models = train({shot}, cfg, make_schedule(3, 0.05, 1.0), 2, 8);
    REQUIRE(models[0].normalization_scale > 0.0);
    // an evaluation at init must produce a finite field
    MatRM patch = MatRM::Constant(8, 4, 0.3);
    REQUIRE(score_eval(models[0], patch, 0.5).allFinite());
}

TEST_CASE("short training runs do not diverge", "[score]") {
    Rng rng(11);
    Sinogram shot(32, 32);
    shot.values = testutil::random_array(32, 32, rng, 0.1, 1.0);
    TrainConfig cfg;
    cfg.total_steps       = 120;
    cfg.batch_size        = 8;
    cfg.hidden_dim        = 32;
    cfg.patches_per_epoch = 64;
    std::vector<double> losses;
    train({shot}, cfg, make_schedule(5, 0.05, 1.0), 2, 16,
          [&](int p, int, double loss) {
              if (p == 0) losses.push_back(loss);
          });
    REQUIRE(losses.size() == 120);
    const auto trace = testutil::ema(losses, 30);
    REQUIRE(trace.back() <= trace[29] * 1.05);
    for (double l : losses) REQUIRE(std::isfinite(l));
}

TEST_CASE("checkpoints round-trip through the float32 blob", "[score]") {
    Rng rng(12);
    Sinogram shot(24, 24);
    shot.values = testutil::random_array(24, 24, rng, 0.1, 1.0);
    TrainConfig cfg;
    cfg.total_steps = 5;
    cfg.hidden_dim  = 8;
    const auto models = train({shot}, cfg, make_schedule(4, 0.05, 1.0), 2, 8);

    const std::string base = "ckpt_test_p0";
    save_model(models[0], base);
    const ScoreModel back = load_model(base);
    REQUIRE(back.kind == ScoreModel::Kind::TrainableNet);
    REQUIRE(back.window == 2);
    REQUIRE(back.patch_rows == 8);
    REQUIRE(back.schedule.levels == models[0].schedule.levels);
    REQUIRE(back.normalization_scale == models[0].normalization_scale);
    // float32 quantization bound
    for (Index i = 0; i < back.net.param_count(); ++i) {
        const double orig = models[0].net.params()[i];
        REQUIRE(back.net.params()[i] ==
                Catch::Approx(orig).margin(1e-6).epsilon(1e-6));
    }

    MatRM mean = MatRM::Constant(8, 4, 0.25);
    save_model(make_analytic_gaussian(mean, 0.5, 2, models[0].schedule), "ckpt_test_g");
    const ScoreModel g = load_model("ckpt_test_g");
    REQUIRE(g.kind == ScoreModel::Kind::AnalyticGaussian);
    REQUIRE(g.variance == 0.5);
    REQUIRE((g.mean_patch.array() == 0.25).all());
}

TEST_CASE("score evaluation rejects bad input", "[score]") {
    const ScoreModel m = zero_net_model(8, 2, 4);
    MatRM patch = MatRM::Zero(8, 4);
    REQUIRE_THROWS_AS(score_eval(m, patch, 0.0), std::invalid_argument);
    patch(0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(score_eval(m, patch, 0.5), std::invalid_argument);
    PatchTensor empty;
    REQUIRE_THROWS_AS(dsm_loss(m, empty, 0.5, 1), std::invalid_argument);
}

TEST_CASE("training rejects shots smaller than the window", "[score]") {
    Sinogram tiny(6, 6);
    tiny.values.setConstant(0.5);
    TrainConfig cfg;
    cfg.total_steps = 1;
    cfg.hidden_dim  = 4;
    REQUIRE_THROWS_AS(train({tiny}, cfg, make_schedule(3, 0.1, 1.0), 8, 64),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(train({}, cfg, make_schedule(3, 0.1, 1.0), 8, 64), std::invalid_argument);
}
