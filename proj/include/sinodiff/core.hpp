#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sinodiff {

using ArrayRM = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatRM   = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index   = Eigen::Index;

/// 2D attenuation map, row-major, values(row, col).
struct Image {
    int width  = 0;
    int height = 0;
    ArrayRM values;  // height x width

    Image() = default;
    Image(int w, int h) : width(w), height(h), values(ArrayRM::Zero(h, w)) {}
};

/// 2D projection array, row-major (view-major), values(view, detector).
struct Sinogram {
    int num_views     = 0;
    int num_detectors = 0;
    ArrayRM values;  // num_views x num_detectors

    Sinogram() = default;
    Sinogram(int views, int dets)
        : num_views(views), num_detectors(dets), values(ArrayRM::Zero(views, dets)) {}
};

inline bool all_finite(const ArrayRM& a) { return a.isFinite().all(); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_data(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

/// Deterministic RNG. All draws go through explicit Box-Muller / inversion /
/// PTRS code so that a fixed seed gives bit-identical streams on every
/// platform, independent of the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller, one value cached.
    double normal() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r  = std::sqrt(-2.0 * std::log(u1));
        const double a  = 2.0 * M_PI * u2;
        cache_      = r * std::sin(a);
        has_cache_  = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free modulo is fine here; n is tiny relative to 2^64.
        return next() % n;
    }

    /// Poisson draw. Inversion for small means, Hormann's PTRS rejection for
    /// moderate ones, rounded normal above 1e7 where the relative error of
    /// the approximation is below 4e-4.
    double poisson(double mean) {
        require(mean >= 0.0, "poisson mean must be non-negative");
        if (mean == 0.0) return 0.0;
        if (mean < 10.0) return poisson_inversion(mean);
        if (mean <= 1e7) return poisson_ptrs(mean);
        const double v = std::round(mean + std::sqrt(mean) * normal());
        return v < 0.0 ? 0.0 : v;
    }

    /// Derive the seed of a named sub-stream (FNV-1a over the name, folded
    /// with the parent seed). Used so one --seed drives independent noise /
    /// training / sampling streams.
    static std::uint64_t derive(std::uint64_t seed, const std::string& name) {
        std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
        for (unsigned char c : name) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= seed * 0x9e3779b97f4a7c15ULL;
        return h ? h : 1;
    }

private:
    // splitmix64; small, fast, and fully specified.
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double poisson_inversion(double mean) {
        const double p0 = std::exp(-mean);
        double p = p0, cdf = p0;
        const double u = uniform();
        double k = 0.0;
        while (u > cdf && k < 400.0) {
            k += 1.0;
            p *= mean / k;
            cdf += p;
        }
        return k;
    }

    double poisson_ptrs(double mean) {
        const double b         = 0.931 + 2.53 * std::sqrt(mean);
        const double a         = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r       = 0.9277 - 3.6224 / (b - 2.0);
        const double log_mean  = std::log(mean);
        for (;;) {
            const double u  = uniform() - 0.5;
            const double v  = uniform_pos();
            const double us = 0.5 - std::abs(u);
            const double k  = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return k;
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                k * log_mean - mean - std::lgamma(k + 1.0)) {
                return k;
            }
        }
    }

    std::uint64_t state_;
    double cache_    = 0.0;
    bool has_cache_  = false;
};

}  // namespace sinodiff
