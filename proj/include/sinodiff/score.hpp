#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "sinodiff/core.hpp"
#include "sinodiff/hankel.hpp"

namespace sinodiff {

/// Strictly decreasing positive noise levels sigma_max .. sigma_min. The
/// annealing index i (0 = smallest level) is exposed through sigma(i).
struct SigmaSchedule {
    std::vector<double> levels;

    int count() const { return static_cast<int>(levels.size()); }
    double sigma(int anneal_index) const { return levels.at(levels.size() - 1 - anneal_index); }
    double sigma_max() const { return levels.front(); }
    double sigma_min() const { return levels.back(); }

    void validate() const {
        require(!levels.empty(), "schedule: empty");
        require(levels.back() > 0.0, "schedule: levels must be positive");
        for (std::size_t i = 1; i < levels.size(); ++i)
            require(levels[i] < levels[i - 1], "schedule: levels must be strictly decreasing");
    }
};

/// Geometric noise schedule with N levels from sigma_max down to sigma_min.
inline SigmaSchedule make_schedule(int n, double sigma_min, double sigma_max) {
    require(n >= 1, "make_schedule: N must be >= 1");
    require(sigma_min > 0.0 && sigma_min < sigma_max, "make_schedule: need 0 < sigma_min < sigma_max");
    SigmaSchedule s;
    s.levels.resize(n);
    if (n == 1) {
        s.levels[0] = sigma_max;
        return s;
    }
    const double ratio = sigma_min / sigma_max;
    for (int j = 0; j < n; ++j) s.levels[j] = sigma_max * std::pow(ratio, double(j) / (n - 1));
    s.levels[0]     = sigma_max;
    s.levels[n - 1] = sigma_min;
    return s;
}

/// Dense score network: flatten -> in x hidden -> SiLU -> hidden x hidden ->
/// SiLU -> hidden x in, plus a learned diagonal input skip, with the output
/// scaled by 1/sigma at evaluation. The skip matters: without it the output
/// would sit in a rank-`hidden` subspace and could never cancel more than
/// hidden/in of the white DSM noise target. Forward and backward passes are
/// written out by hand; parameters live in one flat vector so the optimizer
/// and the checkpoint format stay trivial.
class ScoreNet {
public:
    ScoreNet() = default;
    ScoreNet(int in_dim, int hidden) : in_(in_dim), hidden_(hidden) {
        params_ = Eigen::VectorXd::Zero(param_count());
    }

    int in_dim() const { return in_; }
    int hidden_dim() const { return hidden_; }
    Index param_count() const {
        return Index(hidden_) * in_ + hidden_ + Index(hidden_) * hidden_ + hidden_ +
               Index(in_) * hidden_ + in_ + in_;  // trailing in_: diagonal input skip
    }

    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }

    void init_kaiming(Rng& rng) {
        auto fill = [&](Eigen::Map<Eigen::MatrixXd> w, int fan_in) {
            const double std_dev = std::sqrt(2.0 / fan_in);
            for (Index i = 0; i < w.size(); ++i) w.data()[i] = std_dev * rng.normal();
        };
        fill(w1(), in_);
        b1().setZero();
        fill(w2(), hidden_);
        b2().setZero();
        fill(w3(), hidden_);
        b3().setZero();
        skip().setZero();
    }

    /// Raw network output f(x); the score is f(x)/sigma.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd a1, a2;
        return forward_cached(x, a1, a2);
    }

    /// DSM loss sigma^2 * mean_b ||f(p0+sigma z)/sigma + z/sigma||^2 and its
    /// gradient with respect to the flat parameter vector.
    double loss_and_grad(const Eigen::MatrixXd& p0, const Eigen::MatrixXd& z, double sigma,
                         Eigen::VectorXd& grad) const {
        const Index batch = p0.rows();
        const Eigen::MatrixXd pn = p0 + sigma * z;
        Eigen::MatrixXd a1, a2;
        const Eigen::MatrixXd f = forward_cached(pn, a1, a2);
        const Eigen::MatrixXd g = f + z;  // sigma^2 ||(f+z)/sigma||^2 = ||f+z||^2
        const double loss = g.squaredNorm() / double(batch);

        grad.setZero(param_count());
        GradViews gv(grad, in_, hidden_);
        const Eigen::MatrixXd df = (2.0 / double(batch)) * g;
        gv.w3 = df.transpose() * silu(a2);
        gv.b3 = df.colwise().sum();
        Eigen::MatrixXd dh2 = df * w3c();
        dh2.array() *= silu_grad(a2).array();
        gv.w2 = dh2.transpose() * silu(a1);
        gv.b2 = dh2.colwise().sum();
        Eigen::MatrixXd dh1 = dh2 * w2c();
        dh1.array() *= silu_grad(a1).array();
        gv.w1 = dh1.transpose() * pn;
        gv.b1 = dh1.colwise().sum();
        gv.skip = (df.array() * pn.array()).colwise().sum();
        return loss;
    }

private:
    struct GradViews {
        GradViews(Eigen::VectorXd& g, int in, int hidden)
            : w1(g.data(), hidden, in),
              b1(g.data() + Index(hidden) * in, hidden),
              w2(g.data() + Index(hidden) * in + hidden, hidden, hidden),
              b2(g.data() + Index(hidden) * in + hidden + Index(hidden) * hidden, hidden),
              w3(g.data() + Index(hidden) * in + 2 * hidden + Index(hidden) * hidden, in, hidden),
              b3(g.data() + Index(hidden) * in + 2 * hidden + Index(hidden) * hidden +
                     Index(in) * hidden,
                 in),
              skip(g.data() + Index(hidden) * in + 2 * hidden + Index(hidden) * hidden +
                       Index(in) * hidden + in,
                   in) {}
        Eigen::Map<Eigen::MatrixXd> w1;
        Eigen::Map<Eigen::VectorXd> b1;
        Eigen::Map<Eigen::MatrixXd> w2;
        Eigen::Map<Eigen::VectorXd> b2;
        Eigen::Map<Eigen::MatrixXd> w3;
        Eigen::Map<Eigen::VectorXd> b3;
        Eigen::Map<Eigen::VectorXd> skip;
    };

    // SiLU keeps gradients alive at large noise scales where a bounded
    // activation would saturate.
    static Eigen::MatrixXd silu(const Eigen::MatrixXd& a) {
        return (a.array() / (1.0 + (-a.array()).exp())).matrix();
    }
    static Eigen::MatrixXd silu_grad(const Eigen::MatrixXd& a) {
        const auto s = 1.0 / (1.0 + (-a.array()).exp());
        return (s * (1.0 + a.array() * (1.0 - s))).matrix();
    }

    // Returns the output and the two hidden-layer preactivations.
    Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& x, Eigen::MatrixXd& a1,
                                   Eigen::MatrixXd& a2) const {
        require(x.cols() == in_, "score net: input width mismatch");
        a1 = (x * w1c().transpose()).rowwise() + b1c().transpose();
        a2 = (silu(a1) * w2c().transpose()).rowwise() + b2c().transpose();
        Eigen::MatrixXd f = (silu(a2) * w3c().transpose()).rowwise() + b3c().transpose();
        f.array() += x.array().rowwise() * skipc().transpose().array();
        return f;
    }

    Eigen::Map<Eigen::MatrixXd> w1() { return {params_.data(), hidden_, in_}; }
    Eigen::Map<Eigen::VectorXd> b1() { return {params_.data() + Index(hidden_) * in_, hidden_}; }
    Eigen::Map<Eigen::MatrixXd> w2() {
        return {params_.data() + Index(hidden_) * in_ + hidden_, hidden_, hidden_};
    }
    Eigen::Map<Eigen::VectorXd> b2() {
        return {params_.data() + Index(hidden_) * in_ + hidden_ + Index(hidden_) * hidden_,
                hidden_};
    }
    Eigen::Map<Eigen::MatrixXd> w3() {
        return {params_.data() + Index(hidden_) * in_ + 2 * hidden_ + Index(hidden_) * hidden_,
                in_, hidden_};
    }
    Eigen::Map<Eigen::VectorXd> b3() {
        return {params_.data() + Index(hidden_) * in_ + 2 * hidden_ + Index(hidden_) * hidden_ +
                    Index(in_) * hidden_,
                in_};
    }
    Eigen::Map<const Eigen::MatrixXd> w1c() const { return {params_.data(), hidden_, in_}; }
    Eigen::Map<const Eigen::VectorXd> b1c() const {
        return {params_.data() + Index(hidden_) * in_, hidden_};
    }
    Eigen::Map<const Eigen::MatrixXd> w2c() const {
        return {params_.data() + Index(hidden_) * in_ + hidden_, hidden_, hidden_};
    }
    Eigen::Map<const Eigen::VectorXd> b2c() const {
        return {params_.data() + Index(hidden_) * in_ + hidden_ + Index(hidden_) * hidden_,
                hidden_};
    }
    Eigen::Map<const Eigen::MatrixXd> w3c() const {
        return {params_.data() + Index(hidden_) * in_ + 2 * hidden_ + Index(hidden_) * hidden_,
                in_, hidden_};
    }
    Eigen::Map<const Eigen::VectorXd> b3c() const {
        return {params_.data() + Index(hidden_) * in_ + 2 * hidden_ + Index(hidden_) * hidden_ +
                    Index(in_) * hidden_,
                in_};
    }
    Eigen::Map<Eigen::VectorXd> skip() {
        return {params_.data() + Index(hidden_) * in_ + 2 * hidden_ + Index(hidden_) * hidden_ +
                    Index(in_) * hidden_ + in_,
                in_};
    }
    Eigen::Map<const Eigen::VectorXd> skipc() const {
        return {params_.data() + Index(hidden_) * in_ + 2 * hidden_ + Index(hidden_) * hidden_ +
                    Index(in_) * hidden_ + in_,
                in_};
    }

    int in_ = 0, hidden_ = 0;
    Eigen::VectorXd params_;
};

/// Sigma-conditioned score model over Hankel patches. The trainable kind
/// wraps a ScoreNet; the analytic kind stores a Gaussian (mean patch,
/// variance) and returns the exact score -(p - mean)/(variance + sigma^2).
struct ScoreModel {
    enum class Kind { TrainableNet, AnalyticGaussian };

    Kind kind = Kind::TrainableNet;
    int patch_rows = 64;
    int patch_cols = 64;
    int window     = 8;  // Hankel window l; patch_cols == l*l
    SigmaSchedule schedule;
    double normalization_scale = 1.0;  // training shots' global max
    int partition_index        = 0;
    std::uint64_t seed         = 0;

    ScoreNet net;
    MatRM mean_patch;
    double variance = 1.0;

    Index patch_dim() const { return Index(patch_rows) * patch_cols; }
};

inline ScoreModel make_analytic_gaussian(const MatRM& mean_patch, double variance, int window,
                                         const SigmaSchedule& schedule) {
    require(variance > 0.0, "analytic-gaussian: variance must be > 0");
    ScoreModel m;
    m.kind       = ScoreModel::Kind::AnalyticGaussian;
    m.patch_rows = static_cast<int>(mean_patch.rows());
    m.patch_cols = static_cast<int>(mean_patch.cols());
    m.window     = window;
    m.schedule   = schedule;
    m.mean_patch = mean_patch;
    m.variance   = variance;
    return m;
}

/// Score of a batch of flattened patches (one patch per row).
inline Eigen::MatrixXd score_eval_batch(const ScoreModel& model, const Eigen::MatrixXd& patches,
                                        double sigma) {
    require(sigma > 0.0, "score_eval: sigma must be > 0");
    require(patches.allFinite(), "score_eval: non-finite input");
    require(patches.cols() == model.patch_dim(), "score_eval: patch size mismatch");
    if (model.kind == ScoreModel::Kind::AnalyticGaussian) {
        Eigen::Map<const Eigen::RowVectorXd> mean(model.mean_patch.data(), model.patch_dim());
        return (patches.rowwise() - mean) * (-1.0 / (model.variance + sigma * sigma));
    }
    return model.net.forward(patches) / sigma;
}

/// Score of a single patch.
inline MatRM score_eval(const ScoreModel& model, const MatRM& patch, double sigma) {
    require(patch.rows() == model.patch_rows && patch.cols() == model.patch_cols,
            "score_eval: patch shape mismatch");
    Eigen::MatrixXd row(1, model.patch_dim());
    row.row(0) = Eigen::Map<const Eigen::RowVectorXd>(patch.data(), patch.size());
    const Eigen::MatrixXd s = score_eval_batch(model, row, sigma);
    return Eigen::Map<const MatRM>(s.data(), model.patch_rows, model.patch_cols);
}

namespace detail {

inline Eigen::MatrixXd flatten_patches(const PatchTensor& t) {
    require(!t.patches.empty(), "empty patch batch");
    Eigen::MatrixXd out(static_cast<Index>(t.patches.size()), t.patch_rows * t.patch_cols);
    for (std::size_t i = 0; i < t.patches.size(); ++i) {
        out.row(static_cast<Index>(i)) =
            Eigen::Map<const Eigen::RowVectorXd>(t.patches[i].data(), t.patches[i].size());
    }
    return out;
}

inline Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, Rng& rng) {
    Eigen::MatrixXd z(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) z(r, c) = rng.normal();
    return z;
}

}  // namespace detail

/// Denoising-score-matching loss at one noise level:
/// sigma^2 * mean_b ||s(p0 + sigma z, sigma) + z/sigma||^2.
inline double dsm_loss(const ScoreModel& model, const PatchTensor& patches, double sigma,
                       std::uint64_t seed) {
    require(sigma > 0.0, "dsm_loss: sigma must be > 0");
    require(!patches.patches.empty(), "dsm_loss: empty batch");
    const Eigen::MatrixXd p0 = detail::flatten_patches(patches);
    Rng rng(seed);
    const Eigen::MatrixXd z  = detail::gaussian_matrix(p0.rows(), p0.cols(), rng);
    const Eigen::MatrixXd s  = score_eval_batch(model, p0 + sigma * z, sigma);
    return sigma * sigma * (s + z / sigma).rowwise().squaredNorm().mean();
}

struct TrainConfig {
    double learning_rate  = 0.001;
    int batch_size        = 16;
    int total_steps       = 2000;
    std::uint64_t seed    = 0;
    int patches_per_epoch = 1024;
    int hidden_dim        = 512;

    void validate() const {
        require(learning_rate > 0.0, "train: learning_rate must be > 0");
        require(batch_size >= 1, "train: batch_size must be >= 1");
        require(total_steps >= 0, "train: total_steps must be >= 0");
        require(patches_per_epoch >= batch_size,
                "train: patches_per_epoch must be >= batch_size");
        require(hidden_dim >= 1, "train: hidden_dim must be >= 1");
    }
};

inline void to_json(nlohmann::json& j, const TrainConfig& t) {
    j = nlohmann::json{{"learning_rate", t.learning_rate}, {"batch_size", t.batch_size},
                       {"total_steps", t.total_steps},     {"seed", t.seed},
                       {"patches_per_epoch", t.patches_per_epoch}, {"hidden_dim", t.hidden_dim}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& t) {
    if (j.contains("learning_rate")) j.at("learning_rate").get_to(t.learning_rate);
    if (j.contains("batch_size")) j.at("batch_size").get_to(t.batch_size);
    if (j.contains("total_steps")) j.at("total_steps").get_to(t.total_steps);
    if (j.contains("seed")) j.at("seed").get_to(t.seed);
    if (j.contains("patches_per_epoch")) j.at("patches_per_epoch").get_to(t.patches_per_epoch);
    if (j.contains("hidden_dim")) j.at("hidden_dim").get_to(t.hidden_dim);
    t.validate();
}

namespace detail {

class Adam {
public:
    Adam(Index n, double lr) : lr_(lr), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

    void update(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
        ++t_;
        m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
        v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(beta1_, t_);
        const double c2 = 1.0 - std::pow(beta2_, t_);
        params.array() -=
            lr_ * (m_ / c1).array() / ((v_ / c2).array().sqrt() + 1e-8);
    }

private:
    double lr_;
    double beta1_ = 0.9, beta2_ = 0.999;
    int t_ = 0;
    Eigen::VectorXd m_, v_;
};

}  // namespace detail

using TrainCallback = std::function<void(int partition, int step, double loss)>;

/// Train the three partition score models on one or a few sinogram shots.
/// Shots are normalized to [0, 1] by their global maximum, transformed to
/// triple*-partitioned Hankel matrices, and each partition's model is fitted
/// by Adam on the DSM loss with sigma drawn uniformly from the schedule.
/// Deterministic given cfg.seed.
inline std::array<ScoreModel, 3> train(const std::vector<Sinogram>& shots, const TrainConfig& cfg,
                                       const SigmaSchedule& schedule, int window = 8,
                                       Index patch_rows = 64,
                                       const TrainCallback& callback = nullptr) {
    cfg.validate();
    schedule.validate();
    require(!shots.empty(), "train: at least one shot required");

    double data_max = 0.0;
    for (const Sinogram& s : shots) {
        require(s.num_views >= window && s.num_detectors >= window,
                "train: shot smaller than the Hankel window");
        data_max = std::max(data_max, s.values.maxCoeff());
    }
    require(data_max > 0.0, "train: shots are identically zero");

    // Per partition index, the partition matrices of every shot.
    std::array<std::vector<MatRM>, 3> parts;
    for (const Sinogram& s : shots) {
        Sinogram norm = s;
        norm.values /= data_max;
        PartitionSet ps = partition_triple_star(hankel_transform(norm, window));
        for (int p = 0; p < 3; ++p) {
            require(ps.parts[p].rows() >= patch_rows,
                    "train: partition has fewer rows than one patch");
            parts[p].push_back(std::move(ps.parts[p]));
        }
    }

    const int in_dim = static_cast<int>(patch_rows) * window * window;
    std::array<ScoreModel, 3> models;
    for (int p = 0; p < 3; ++p) {
        ScoreModel& model = models[p];
        model.kind                = ScoreModel::Kind::TrainableNet;
        model.patch_rows          = static_cast<int>(patch_rows);
        model.patch_cols          = window * window;
        model.window              = window;
        model.schedule            = schedule;
        model.normalization_scale = data_max;
        model.partition_index     = p;
        model.seed                = cfg.seed;
        model.net                 = ScoreNet(in_dim, cfg.hidden_dim);

        Rng rng(Rng::derive(cfg.seed, "train-partition-" + std::to_string(p)));
        model.net.init_kaiming(rng);

        detail::Adam opt(model.net.param_count(), cfg.learning_rate);
        Eigen::VectorXd grad(model.net.param_count());
        Eigen::MatrixXd pool;  // patches_per_epoch x in_dim
        int pool_cursor = cfg.patches_per_epoch;  // forces a fill on first use

        for (int step = 0; step < cfg.total_steps; ++step) {
            if (pool_cursor + cfg.batch_size > cfg.patches_per_epoch) {
                pool.resize(cfg.patches_per_epoch, in_dim);
                for (int i = 0; i < cfg.patches_per_epoch; ++i) {
                    const auto& mats = parts[p];
                    const std::size_t shot = mats.size() == 1 ? 0 : rng.below(mats.size());
                    const Index span = mats[shot].rows() - patch_rows + 1;
                    const Index off  = static_cast<Index>(rng.below(std::uint64_t(span)));
                    pool.row(i) = Eigen::Map<const Eigen::RowVectorXd>(
                        MatRM(mats[shot].middleRows(off, patch_rows)).data(), in_dim);
                }
                pool_cursor = 0;
            }
            const double sigma = schedule.levels[rng.below(std::uint64_t(schedule.count()))];
            const Eigen::MatrixXd p0 = pool.middleRows(pool_cursor, cfg.batch_size);
            pool_cursor += cfg.batch_size;
            const Eigen::MatrixXd z = detail::gaussian_matrix(cfg.batch_size, in_dim, rng);
            const double loss = model.net.loss_and_grad(p0, z, sigma, grad);
            opt.update(model.net.params(), grad);
            if (callback) callback(p, step, loss);
        }
    }
    return models;
}

/// Checkpoint: flat little-endian float32 parameter blob + JSON manifest.
inline void save_model(const ScoreModel& model, const std::string& basename) {
    nlohmann::json manifest;
    manifest["kind"] =
        model.kind == ScoreModel::Kind::TrainableNet ? "trainable-net" : "analytic-gaussian";
    manifest["patch_rows"]          = model.patch_rows;
    manifest["patch_cols"]          = model.patch_cols;
    manifest["window"]              = model.window;
    manifest["schedule"]            = model.schedule.levels;
    manifest["normalization_scale"] = model.normalization_scale;
    manifest["partition_index"]     = model.partition_index;
    manifest["seed"]                = model.seed;

    std::vector<float> blob;
    if (model.kind == ScoreModel::Kind::TrainableNet) {
        manifest["layers"] = {model.net.in_dim(), model.net.hidden_dim(), model.net.hidden_dim(),
                              model.net.in_dim()};
        blob.resize(model.net.param_count());
        for (Index i = 0; i < model.net.param_count(); ++i)
            blob[i] = static_cast<float>(model.net.params()[i]);
    } else {
        manifest["layers"] = nlohmann::json::array();
        manifest["variance"] = model.variance;
        blob.resize(model.patch_dim());
        for (Index i = 0; i < model.patch_dim(); ++i)
            blob[i] = static_cast<float>(model.mean_patch.data()[i]);
    }

    std::ofstream bin(basename + ".bin", std::ios::binary);
    require_data(bin.good(), "save_model: cannot open " + basename + ".bin");
    bin.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(float)));
    require_data(bin.good(), "save_model: write failed");
    bin.close();

    std::ofstream man(basename + ".json");
    require_data(man.good(), "save_model: cannot open " + basename + ".json");
    man << manifest.dump(2) << "\n";
}

inline ScoreModel load_model(const std::string& basename) {
    std::ifstream man(basename + ".json");
    require_data(man.good(), "load_model: cannot open " + basename + ".json");
    nlohmann::json manifest = nlohmann::json::parse(man);

    ScoreModel model;
    const std::string kind = manifest.at("kind").get<std::string>();
    model.patch_rows       = manifest.at("patch_rows").get<int>();
    model.patch_cols       = manifest.at("patch_cols").get<int>();
    model.window           = manifest.at("window").get<int>();
    model.schedule.levels  = manifest.at("schedule").get<std::vector<double>>();
    model.schedule.validate();
    model.normalization_scale = manifest.at("normalization_scale").get<double>();
    model.partition_index     = manifest.at("partition_index").get<int>();
    model.seed                = manifest.at("seed").get<std::uint64_t>();

    std::ifstream bin(basename + ".bin", std::ios::binary | std::ios::ate);
    require_data(bin.good(), "load_model: cannot open " + basename + ".bin");
    const std::streamsize bytes = bin.tellg();
    require_data(bytes % sizeof(float) == 0, "load_model: blob size not a float multiple");
    std::vector<float> floats(static_cast<std::size_t>(bytes) / sizeof(float));
    bin.seekg(0);
    bin.read(reinterpret_cast<char*>(floats.data()), bytes);
    require_data(bin.good(), "load_model: blob read failed");

    if (kind == "trainable-net") {
        model.kind = ScoreModel::Kind::TrainableNet;
        const auto layers = manifest.at("layers").get<std::vector<int>>();
        require_data(layers.size() == 4, "load_model: bad layer spec");
        model.net = ScoreNet(layers[0], layers[1]);
        require_data(static_cast<Index>(floats.size()) == model.net.param_count(),
                     "load_model: blob size does not match layers");
        for (Index i = 0; i < model.net.param_count(); ++i) model.net.params()[i] = floats[i];
    } else if (kind == "analytic-gaussian") {
        model.kind     = ScoreModel::Kind::AnalyticGaussian;
        model.variance = manifest.at("variance").get<double>();
        require_data(static_cast<Index>(floats.size()) == model.patch_dim(),
                     "load_model: blob size does not match patch shape");
        model.mean_patch.resize(model.patch_rows, model.patch_cols);
        for (Index i = 0; i < model.patch_dim(); ++i) model.mean_patch.data()[i] = floats[i];
    } else {
        throw std::runtime_error("load_model: unknown kind '" + kind + "'");
    }
    return model;
}

}  // namespace sinodiff
