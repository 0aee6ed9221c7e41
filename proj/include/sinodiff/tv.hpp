#pragma once

#include <json.hpp>

#include "sinodiff/core.hpp"

namespace sinodiff {

struct TvSpec {
    double alpha   = 0.2;   // normalized gradient-descent step factor
    int iters      = 2;     // inner TV iterations
    double epsilon = 1e-6;  // gradient smoothing constant

    void validate() const {
        require(alpha >= 0.0, "tv: alpha must be >= 0");
        require(iters >= 0, "tv: iters must be >= 0");
        require(epsilon > 0.0, "tv: epsilon must be > 0");
    }
};

inline void to_json(nlohmann::json& j, const TvSpec& t) {
    j = nlohmann::json{{"alpha", t.alpha}, {"iters", t.iters}, {"epsilon", t.epsilon}};
}

inline void from_json(const nlohmann::json& j, TvSpec& t) {
    if (j.contains("alpha")) j.at("alpha").get_to(t.alpha);
    if (j.contains("iters")) j.at("iters").get_to(t.iters);
    if (j.contains("epsilon")) j.at("epsilon").get_to(t.epsilon);
    t.validate();
}

/// Smoothed isotropic TV: sum over pixels of sqrt(dh^2 + dv^2 + eps^2) - eps
/// with forward differences and replicate boundary, so constant images score
/// exactly zero.
inline double tv_norm(const ArrayRM& x, double epsilon = 1e-6) {
    require(x.rows() >= 2 && x.cols() >= 2, "tv_norm: needs at least 2x2");
    double total = 0.0;
    const Index rows = x.rows(), cols = x.cols();
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const double dh = c + 1 < cols ? x(r, c + 1) - x(r, c) : 0.0;
            const double dv = r + 1 < rows ? x(r + 1, c) - x(r, c) : 0.0;
            total += std::sqrt(dh * dh + dv * dv + epsilon * epsilon) - epsilon;
        }
    }
    return total;
}

inline double tv_norm(const Sinogram& x, double epsilon = 1e-6) {
    return tv_norm(x.values, epsilon);
}

/// Gradient of the smoothed TV.
inline ArrayRM tv_grad(const ArrayRM& x, double epsilon) {
    const Index rows = x.rows(), cols = x.cols();
    ArrayRM g = ArrayRM::Zero(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const double dh = c + 1 < cols ? x(r, c + 1) - x(r, c) : 0.0;
            const double dv = r + 1 < rows ? x(r + 1, c) - x(r, c) : 0.0;
            const double n  = std::sqrt(dh * dh + dv * dv + epsilon * epsilon);
            if (c + 1 < cols) {
                g(r, c) -= dh / n;
                g(r, c + 1) += dh / n;
            }
            if (r + 1 < rows) {
                g(r, c) -= dv / n;
                g(r + 1, c) += dv / n;
            }
        }
    }
    return g;
}

/// Normalized-gradient TV descent: `iters` steps of
/// x <- x - alpha * ||x_cur - x_prev|| * grad / ||grad||, with the step
/// scale fixed from the two outer-loop iterates.
inline Sinogram tv_step(const Sinogram& x_prev, const Sinogram& x_cur, const TvSpec& spec) {
    spec.validate();
    require(x_prev.num_views == x_cur.num_views && x_prev.num_detectors == x_cur.num_detectors,
            "tv_step: dimension mismatch");
    const double dx = std::sqrt((x_cur.values - x_prev.values).square().sum());
    Sinogram out = x_cur;
    for (int it = 0; it < spec.iters; ++it) {
        const ArrayRM g = tv_grad(out.values, spec.epsilon);
        const double gn = std::sqrt(g.square().sum());
        if (gn <= 1e-14) break;
        out.values -= spec.alpha * dx / gn * g;
    }
    return out;
}

}  // namespace sinodiff
