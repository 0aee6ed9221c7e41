#pragma once

#include <string>
#include <vector>

#include "sinodiff/core.hpp"
#include "sinodiff/geometry.hpp"

namespace sinodiff {

namespace detail {

/// Band-limited ramp kernel for bin spacing tau, halved for the fan-beam
/// weighting convention. h(0) = 1/(4 tau^2), h(n odd) = -1/(pi n tau)^2,
/// h(n even) = 0.
inline std::vector<double> ramp_kernel(int n, double tau, bool hann) {
    std::vector<double> base(2 * n + 1, 0.0);
    auto h = [&](int k) -> double {
        if (k == 0) return 1.0 / (4.0 * tau * tau);
        if (k % 2 == 0) return 0.0;
        return -1.0 / (M_PI * M_PI * double(k) * double(k) * tau * tau);
    };
    for (int k = -n; k <= n; ++k) {
        double v = hann ? 0.5 * h(k) + 0.25 * h(k - 1) + 0.25 * h(k + 1) : h(k);
        base[k + n] = 0.5 * v;  // fan-beam filter is half the parallel ramp
    }
    return base;
}

}  // namespace detail

/// Fan-beam weighted filtered back-projection onto the geometry's image
/// grid. Projections are rescaled to a virtual flat detector through the
/// rotation centre, cosine-weighted, ramp-filtered (optionally Hann
/// windowed), and back-projected with inverse-square distance weighting and
/// linear interpolation in the detector coordinate.
inline Image fbp_reconstruct(const Sinogram& sino, const FanGeometry& geom,
                             const std::string& filter = "ram-lak") {
    geom.validate();
    require(sino.num_views == geom.num_views && sino.num_detectors == geom.num_detectors,
            "fbp_reconstruct: sinogram dims do not match geometry");
    bool hann = false;
    if (filter == "hann") {
        hann = true;
    } else if (filter != "ram-lak") {
        throw std::invalid_argument("fbp_reconstruct: unknown filter '" + filter + "'");
    }

    const int nv = geom.num_views;
    const int nd = geom.num_detectors;
    const double dso = geom.source_to_center;
    const double dsd = geom.source_to_detector();
    const double tau = geom.bin_width() * dso / dsd;  // virtual detector bin spacing
    const double dbeta = 2.0 * M_PI / nv;

    // Weight and filter every view.
    const std::vector<double> kernel = detail::ramp_kernel(nd - 1, tau, hann);
    ArrayRM filtered(nv, nd);
    std::vector<double> weighted(nd);
    for (int v = 0; v < nv; ++v) {
        for (int d = 0; d < nd; ++d) {
            const double tv = ((d + 0.5) - 0.5 * nd) * tau;
            weighted[d] = sino.values(v, d) * dso / std::sqrt(dso * dso + tv * tv);
        }
        for (int d = 0; d < nd; ++d) {
            double acc = 0.0;
            for (int k = 0; k < nd; ++k) acc += weighted[k] * kernel[d - k + nd - 1];
            filtered(v, d) = acc * tau;
        }
    }

    // Back-project with linear interpolation between detector bins.
    Image img(geom.image_size, geom.image_size);
    const double half = 0.5 * geom.image_size * geom.pixel_spacing;
    for (int v = 0; v < nv; ++v) {
        const double beta = 2.0 * M_PI * v / nv;
        const double cb = std::cos(beta), sb = std::sin(beta);
        for (int r = 0; r < geom.image_size; ++r) {
            const double py = half - (r + 0.5) * geom.pixel_spacing;
            for (int c = 0; c < geom.image_size; ++c) {
                const double px = -half + (c + 0.5) * geom.pixel_spacing;
                const double along = px * cb + py * sb;   // distance toward the source
                const double across = -px * sb + py * cb; // along the virtual detector
                const double L = dso - along;
                if (L <= 0.0) continue;
                const double tv = dso * across / L;
                const double u = tv / tau + 0.5 * nd - 0.5;
                const int i0 = static_cast<int>(std::floor(u));
                if (i0 < 0 || i0 >= nd - 1) continue;
                const double frac = u - i0;
                const double q = (1.0 - frac) * filtered(v, i0) + frac * filtered(v, i0 + 1);
                img.values(r, c) += dbeta * dso * dso / (L * L) * q;
            }
        }
    }
    return img;
}

}  // namespace sinodiff
