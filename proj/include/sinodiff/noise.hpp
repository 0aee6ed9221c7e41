#pragma once

#include <json.hpp>

#include "sinodiff/core.hpp"

namespace sinodiff {

/// Photon statistics of one low-dose acquisition: uniform source intensity
/// per ray, uniform expected background counts, and the RNG seed for the
/// Poisson draws.
struct DoseSpec {
    double source_intensity = 1e5;  // photons per ray
    double background       = 0.0;  // expected background counts
    std::uint64_t seed      = 0;

    void validate() const {
        require(source_intensity > 0.0, "dose: source_intensity must be > 0");
        require(background >= 0.0, "dose: background must be >= 0");
    }
};

inline void to_json(nlohmann::json& j, const DoseSpec& d) {
    j = nlohmann::json{{"source_intensity", d.source_intensity},
                       {"background", d.background},
                       {"seed", d.seed}};
}

inline void from_json(const nlohmann::json& j, DoseSpec& d) {
    if (j.contains("source_intensity")) j.at("source_intensity").get_to(d.source_intensity);
    if (j.contains("background")) j.at("background").get_to(d.background);
    if (j.contains("seed")) j.at("seed").get_to(d.seed);
    d.validate();
}

/// Inverse-variance PWLS weights, same dims as the sinogram they were built
/// from, normalized to unit mean.
struct WeightMap {
    int num_views     = 0;
    int num_detectors = 0;
    ArrayRM values;
};

/// Scale a sinogram so its maximum entry equals target (no-op on an all-zero
/// sinogram). Returns the factor applied.
inline double rescale_to_max(Sinogram& sino, double target) {
    require(target > 0.0, "rescale_to_max: target must be > 0");
    const double mx = sino.values.maxCoeff();
    if (mx <= 0.0) return 1.0;
    const double factor = target / mx;
    sino.values *= factor;
    return factor;
}

/// Simulate a low-dose acquisition of the noise-free line integrals x:
/// per entry draw L ~ Poisson(a*exp(-x) + r) transmitted counts and map back
/// through y = -log(max(L - r, 0.5)/a). Deterministic given dose.seed.
inline Sinogram simulate_low_dose(const Sinogram& x, const DoseSpec& dose) {
    dose.validate();
    require(all_finite(x.values), "simulate_low_dose: input must be finite");
    require(x.values.minCoeff() >= 0.0,
            "simulate_low_dose: line integrals must be non-negative (exp(-x) in (0,1])");
    Rng rng(dose.seed);
    Sinogram y(x.num_views, x.num_detectors);
    const double a = dose.source_intensity;
    const double r = dose.background;
    double max_net = 0.0;
    for (int v = 0; v < x.num_views; ++v) {
        for (int d = 0; d < x.num_detectors; ++d) {
            const double counts = rng.poisson(a * std::exp(-x.values(v, d)) + r);
            const double net = counts - r;
            max_net = std::max(max_net, net);
            y.values(v, d) = -std::log(std::max(net, 0.5) / a);
        }
    }
    require_data(max_net > 0.0,
                 "simulate_low_dose: all post-subtraction counts are zero; dose too low");
    return y;
}

/// PWLS statistical weights w_i = a*exp(-y_i/eta), normalized to unit mean.
inline WeightMap pwls_weights(const Sinogram& y, const DoseSpec& dose, double eta) {
    dose.validate();
    require(eta > 0.0, "pwls_weights: eta must be > 0");
    WeightMap w;
    w.num_views     = y.num_views;
    w.num_detectors = y.num_detectors;
    w.values        = dose.source_intensity * (-y.values / eta).exp();
    w.values /= w.values.mean();
    return w;
}

}  // namespace sinodiff
