#pragma once

#include <array>
#include <functional>
#include <utility>

#include "sinodiff/core.hpp"
#include "sinodiff/fbp.hpp"
#include "sinodiff/hankel.hpp"
#include "sinodiff/lowrank.hpp"
#include "sinodiff/noise.hpp"
#include "sinodiff/score.hpp"
#include "sinodiff/tv.hpp"

namespace sinodiff {

/// Noise-level sub-object of the reconstruction config; expanded into a
/// geometric SigmaSchedule.
struct ScheduleSpec {
    int levels       = 11;  // outer_iters + 1
    double sigma_min = 5e-4;
    double sigma_max = 5e-3;

    SigmaSchedule build() const { return make_schedule(levels, sigma_min, sigma_max); }
};

inline void to_json(nlohmann::json& j, const ScheduleSpec& s) {
    j = nlohmann::json{{"levels", s.levels}, {"sigma_min", s.sigma_min}, {"sigma_max", s.sigma_max}};
}

inline void from_json(const nlohmann::json& j, ScheduleSpec& s) {
    if (j.contains("levels")) j.at("levels").get_to(s.levels);
    if (j.contains("sigma_min")) j.at("sigma_min").get_to(s.sigma_min);
    if (j.contains("sigma_max")) j.at("sigma_max").get_to(s.sigma_max);
}

struct ReconConfig {
    int outer_iters     = 10;  // N; 300 is the full-scale setting
    int corrector_iters = 2;   // M
    RankSpec rank;
    TvSpec tv;
    double lambda_dc     = 1.0;
    double corrector_snr = 0.16;
    ScheduleSpec schedule;
    std::uint64_t seed = 0;

    void validate() const {
        require(outer_iters >= 0, "recon: outer_iters must be >= 0");
        require(corrector_iters >= 0, "recon: corrector_iters must be >= 0");
        require(lambda_dc >= 0.0, "recon: lambda_dc must be >= 0");
        require(corrector_snr > 0.0, "recon: corrector_snr must be > 0");
        rank.validate();
        tv.validate();
    }
};

inline void to_json(nlohmann::json& j, const ReconConfig& c) {
    j = nlohmann::json{{"outer_iters", c.outer_iters},
                       {"corrector_iters", c.corrector_iters},
                       {"rank", c.rank},
                       {"tv", c.tv},
                       {"lambda_dc", c.lambda_dc},
                       {"corrector_snr", c.corrector_snr},
                       {"schedule", c.schedule},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, ReconConfig& c) {
    if (j.contains("outer_iters")) j.at("outer_iters").get_to(c.outer_iters);
    if (j.contains("corrector_iters")) j.at("corrector_iters").get_to(c.corrector_iters);
    if (j.contains("rank")) j.at("rank").get_to(c.rank);
    if (j.contains("tv")) j.at("tv").get_to(c.tv);
    if (j.contains("lambda_dc")) j.at("lambda_dc").get_to(c.lambda_dc);
    if (j.contains("corrector_snr")) j.at("corrector_snr").get_to(c.corrector_snr);
    if (j.contains("schedule")) j.at("schedule").get_to(c.schedule);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
    c.validate();
}

using PartitionModels = std::array<ScoreModel, 3>;

namespace detail {

inline void check_models(const PartitionModels& models) {
    for (int p = 1; p < 3; ++p) {
        require(models[p].window == models[0].window &&
                    models[p].patch_rows == models[0].patch_rows &&
                    models[p].patch_cols == models[0].patch_cols,
                "sampler: partition models disagree on patch geometry");
        require(models[p].normalization_scale == models[0].normalization_scale,
                "sampler: partition models disagree on normalization scale");
    }
    require(models[0].patch_cols == models[0].window * models[0].window,
            "sampler: patch width must equal window^2");
}

}  // namespace detail

/// Sinogram-shaped score estimate: Hankel-transform, triple*-partition, tile
/// each partition, evaluate its model per tile, untile, mean-recombine, and
/// pseudo-invert. The three partition evaluations are independent; `order`
/// only permutes their execution, never the combination order, so any
/// permutation is bit-identical.
inline Sinogram score_field(const Sinogram& x, const PartitionModels& models, double sigma,
                            std::array<int, 3> order = {0, 1, 2}) {
    detail::check_models(models);
    const int l           = models[0].window;
    const Index patch_rows = models[0].patch_rows;

    const PartitionSet ps = partition_triple_star(hankel_transform(x, l));
    PartitionSet scored   = ps;
    for (int slot : order) {
        PatchTensor tiles = tile_for_inference(ps.parts[slot], patch_rows);
        Eigen::MatrixXd batch(static_cast<Index>(tiles.patches.size()), models[slot].patch_dim());
        for (std::size_t t = 0; t < tiles.patches.size(); ++t) {
            batch.row(static_cast<Index>(t)) = Eigen::Map<const Eigen::RowVectorXd>(
                tiles.patches[t].data(), tiles.patches[t].size());
        }
        const Eigen::MatrixXd s = score_eval_batch(models[slot], batch, sigma);
        for (std::size_t t = 0; t < tiles.patches.size(); ++t) {
            // copy the (strided) row before reshaping it into a patch
            const Eigen::RowVectorXd row = s.row(static_cast<Index>(t));
            tiles.patches[t] =
                Eigen::Map<const MatRM>(row.data(), patch_rows, models[slot].patch_cols);
        }
        scored.parts[slot] = untile(tiles, ps.parts[slot].rows());
    }
    return hankel_pinv(recombine(scored));
}

/// Reverse-SDE predictor: x += (s_next^2 - s_cur^2) * score(x, s_next)
///                           + sqrt(s_next^2 - s_cur^2) * z.
inline Sinogram predictor_step(const Sinogram& x, const PartitionModels& models,
                               double sigma_next, double sigma_cur, Rng& rng,
                               bool add_noise = true) {
    require(sigma_next >= sigma_cur && sigma_cur >= 0.0,
            "predictor_step: need sigma_next >= sigma_cur >= 0");
    require(sigma_next > 0.0, "predictor_step: sigma_next must be > 0");
    const double dv = sigma_next * sigma_next - sigma_cur * sigma_cur;
    Sinogram out = x;
    if (dv == 0.0 && !add_noise) return out;
    const Sinogram s = score_field(x, models, sigma_next);
    out.values += dv * s.values;
    if (add_noise && dv > 0.0) {
        const double sd = std::sqrt(dv);
        for (int v = 0; v < out.num_views; ++v)
            for (int d = 0; d < out.num_detectors; ++d) out.values(v, d) += sd * rng.normal();
    }
    return out;
}

/// Annealed Langevin corrector with step size eps = 2*(snr*sigma)^2:
/// x += eps * score(x, sigma) + sqrt(2 eps) * z.
inline Sinogram corrector_step(const Sinogram& x, const PartitionModels& models, double sigma,
                               double snr, Rng& rng, bool add_noise = true) {
    require(sigma > 0.0, "corrector_step: sigma must be > 0");
    require(snr >= 0.0, "corrector_step: snr must be >= 0");
    const double eps = 2.0 * (snr * sigma) * (snr * sigma);
    Sinogram out = x;
    if (eps == 0.0) return out;
    const Sinogram s = score_field(x, models, sigma);
    out.values += eps * s.values;
    if (add_noise) {
        const double sd = std::sqrt(2.0 * eps);
        for (int v = 0; v < out.num_views; ++v)
            for (int d = 0; d < out.num_detectors; ++d) out.values(v, d) += sd * rng.normal();
    }
    return out;
}

/// PWLS data-consistency blend x_out = (w .* y + lambda * x) ./ (w + lambda).
/// lambda = 0 returns y exactly; lambda -> inf returns x.
inline Sinogram dc_pwls_step(const Sinogram& x, const Sinogram& y, const WeightMap& w,
                             double lambda_dc) {
    require(x.num_views == y.num_views && x.num_detectors == y.num_detectors &&
                w.num_views == y.num_views && w.num_detectors == y.num_detectors,
            "dc_pwls_step: dimension mismatch");
    require(lambda_dc >= 0.0, "dc_pwls_step: lambda must be >= 0");
    if (lambda_dc == 0.0) return y;
    Sinogram out = x;
    out.values = (w.values * y.values + lambda_dc * x.values) / (w.values + lambda_dc);
    return out;
}

/// Per-outer-iteration observer: annealing index i (0 = last iteration) and
/// the current sinogram iterate in physical units.
using ReconCallback = std::function<void(int anneal_index, const Sinogram& x)>;

/// The full iterative reconstruction: initialized at the low-dose sinogram,
/// each outer iteration runs predictor, low-rank, TV and data-consistency
/// steps followed by M corrector/data-consistency pairs; the reconstructed
/// sinogram is filtered back-projected at the end.
inline std::pair<Sinogram, Image> reconstruct(const Sinogram& y, const PartitionModels& models,
                                              const WeightMap& weights, const FanGeometry& geom,
                                              const ReconConfig& cfg,
                                              const ReconCallback& callback = nullptr,
                                              const std::string& fbp_filter = "ram-lak") {
    cfg.validate();
    detail::check_models(models);
    require(all_finite(y.values), "reconstruct: input must be finite");
    const int n = cfg.outer_iters;
    if (n == 0) {
        Image img = fbp_reconstruct(y, geom, fbp_filter);
        return {y, std::move(img)};
    }
    SigmaSchedule sched = cfg.schedule.build();
    require(sched.count() == n + 1, "reconstruct: schedule must carry outer_iters + 1 levels");

    const double scale = models[0].normalization_scale;
    require(scale > 0.0, "reconstruct: normalization scale must be > 0");

    Sinogram yn = y;
    yn.values /= scale;
    Sinogram xn = yn;  // low-dose initialization, no added start noise
    Rng rng(cfg.seed);

    auto guarded = [&](int i, const char* step, auto&& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            throw std::runtime_error("reconstruct: outer iteration i=" + std::to_string(i) +
                                     ", step=" + step + ": " + e.what());
        }
    };

    for (int k = 0; k < n; ++k) {
        const int i = n - 1 - k;
        const Sinogram x_prev = xn;

        xn = guarded(i, "predictor", [&] {
            return predictor_step(xn, models, sched.sigma(i + 1), sched.sigma(i), rng);
        });
        xn = guarded(i, "low-rank", [&] {
            const PartitionSet ps = partition_triple_star(hankel_transform(xn, models[0].window));
            return hankel_pinv(lr_step(ps, cfg.rank));
        });
        xn = guarded(i, "tv", [&] { return tv_step(x_prev, xn, cfg.tv); });
        xn = guarded(i, "dc", [&] { return dc_pwls_step(xn, yn, weights, cfg.lambda_dc); });
        for (int j = 0; j < cfg.corrector_iters; ++j) {
            xn = guarded(i, "corrector", [&] {
                return corrector_step(xn, models, sched.sigma(i), cfg.corrector_snr, rng);
            });
            xn = guarded(i, "dc", [&] { return dc_pwls_step(xn, yn, weights, cfg.lambda_dc); });
        }
        require_data(all_finite(xn.values),
                     "reconstruct: non-finite iterate at outer iteration i=" + std::to_string(i));
        if (callback) {
            Sinogram phys = xn;
            phys.values *= scale;
            callback(i, phys);
        }
    }

    Sinogram out = xn;
    out.values *= scale;
    Image img = fbp_reconstruct(out, geom, fbp_filter);
    return {std::move(out), std::move(img)};
}

}  // namespace sinodiff
