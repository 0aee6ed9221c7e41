#pragma once

#include <array>
#include <string>

#include "sinodiff/core.hpp"

namespace sinodiff {

namespace detail {

struct Ellipse {
    double intensity;   // additive attenuation
    double a, b;        // semi-axes, relative to the image half-width
    double x0, y0;      // centre, relative coordinates in [-1, 1]
    double phi_deg;     // rotation, degrees CCW
};

/// Ten-ellipse head phantom with the low-contrast intensity set, so the
/// summed attenuation stays inside [0, 1].
inline const std::array<Ellipse, 10>& shepp_logan_ellipses() {
    static const std::array<Ellipse, 10> e = {{
        {1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
        {-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
        {-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
        {-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
        {0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
        {0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
        {0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
        {0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
        {0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
        {0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
    }};
    return e;
}

inline double ellipse_sum_at(double x, double y) {
    double v = 0.0;
    for (const Ellipse& el : shepp_logan_ellipses()) {
        const double phi = el.phi_deg * M_PI / 180.0;
        const double dx  = x - el.x0;
        const double dy  = y - el.y0;
        const double xr  = dx * std::cos(phi) + dy * std::sin(phi);
        const double yr  = -dx * std::sin(phi) + dy * std::cos(phi);
        if (xr * xr / (el.a * el.a) + yr * yr / (el.b * el.b) <= 1.0) v += el.intensity;
    }
    return v;
}

}  // namespace detail

struct PhantomSpec {
    std::string kind = "shepp-logan";  // shepp-logan | uniform-disk | constant
    double value     = 1.0;            // constant value / disk attenuation
    double radius    = -1.0;           // disk radius in pixels; <0 means 0.5*size
};

/// Deterministic test phantom on a size x size grid with values in [0, 1].
/// Pixel (r, c) samples the continuous phantom at the pixel centre; row 0 is
/// the top of the image, +y up in phantom coordinates.
inline Image make_phantom(int size, const PhantomSpec& spec) {
    require(size >= 16, "make_phantom: size must be >= 16");
    Image img(size, size);
    const double half = size / 2.0;

    if (spec.kind == "constant") {
        require(spec.value >= 0.0 && spec.value <= 1.0, "make_phantom: constant value must be in [0,1]");
        img.values.setConstant(spec.value);
        return img;
    }
    if (spec.kind == "uniform-disk") {
        require(spec.value >= 0.0 && spec.value <= 1.0, "make_phantom: disk value must be in [0,1]");
        const double radius = spec.radius < 0.0 ? 0.5 * size : spec.radius;
        for (int r = 0; r < size; ++r) {
            for (int c = 0; c < size; ++c) {
                const double x = (c + 0.5) - half;
                const double y = half - (r + 0.5);
                img.values(r, c) = (x * x + y * y <= radius * radius) ? spec.value : 0.0;
            }
        }
        return img;
    }
    if (spec.kind == "shepp-logan") {
        for (int r = 0; r < size; ++r) {
            for (int c = 0; c < size; ++c) {
                const double x = ((c + 0.5) - half) / half;
                const double y = (half - (r + 0.5)) / half;
                // cancelling intensities can leave -1e-17 residue; pin to [0, 1]
                img.values(r, c) = std::clamp(detail::ellipse_sum_at(x, y), 0.0, 1.0);
            }
        }
        return img;
    }
    throw std::invalid_argument("make_phantom: unsupported kind '" + spec.kind + "'");
}

}  // namespace sinodiff
