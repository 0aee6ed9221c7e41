#pragma once

#include <algorithm>
#include <vector>

#include "sinodiff/core.hpp"
#include "sinodiff/geometry.hpp"

namespace sinodiff {

namespace detail {

struct Ray {
    double sx, sy;  // source
    double ex, ey;  // detector bin centre
};

/// Source position and detector bin centre for view v, bin d. The source
/// rotates on a circle of radius source_to_center; the flat detector is
/// centred on the opposite side, perpendicular to the central ray, with bin
/// centres spaced uniformly along it.
inline Ray fan_ray(const FanGeometry& g, int view, int det) {
    const double beta = 2.0 * M_PI * view / g.num_views;
    const double cb = std::cos(beta), sb = std::sin(beta);
    const double t = ((det + 0.5) - 0.5 * g.num_detectors) * g.bin_width();
    Ray r;
    r.sx = g.source_to_center * cb;
    r.sy = g.source_to_center * sb;
    r.ex = -g.detector_to_center * cb - t * sb;
    r.ey = -g.detector_to_center * sb + t * cb;
    return r;
}

/// Clip the segment to the image square, returning the parameter interval
/// [a0, a1] in units of the segment (empty if a1 <= a0).
inline bool clip_to_square(double sx, double sy, double dx, double dy, double half,
                           double& a0, double& a1) {
    a0 = 0.0;
    a1 = 1.0;
    for (int axis = 0; axis < 2; ++axis) {
        const double s = axis == 0 ? sx : sy;
        const double d = axis == 0 ? dx : dy;
        if (std::abs(d) < 1e-300) {
            if (s < -half || s > half) return false;
            continue;
        }
        double lo = (-half - s) / d;
        double hi = (half - s) / d;
        if (lo > hi) std::swap(lo, hi);
        a0 = std::max(a0, lo);
        a1 = std::min(a1, hi);
    }
    return a1 > a0;
}

/// Siddon traversal: accumulate path-length-weighted pixel values along one
/// ray. Grid-line crossings along x and y are generated in ascending order
/// and merged; each segment is attributed to the pixel under its midpoint.
class SiddonTracer {
public:
    explicit SiddonTracer(const FanGeometry& g)
        : n_(g.image_size), spacing_(g.pixel_spacing), half_(0.5 * g.image_size * g.pixel_spacing) {
        ax_.reserve(n_ + 1);
        ay_.reserve(n_ + 1);
        merged_.reserve(2 * n_ + 4);
    }

    double trace(const Ray& ray, const ArrayRM& img) {
        double sum = 0.0;
        trace_impl(ray, [&](int r, int c, double len) { sum += len * img(r, c); });
        return sum;
    }

    void splat(const Ray& ray, double value, ArrayRM& img) {
        trace_impl(ray, [&](int r, int c, double len) { img(r, c) += len * value; });
    }

    /// Sum of Siddon segment lengths; equals the chord of the ray with the
    /// image square.
    double path_length(const Ray& ray) {
        double sum = 0.0;
        trace_impl(ray, [&](int, int, double len) { sum += len; });
        return sum;
    }

private:
    template <typename Visit>
    void trace_impl(const Ray& ray, Visit&& visit) {
        const double dx = ray.ex - ray.sx;
        const double dy = ray.ey - ray.sy;
        double a0, a1;
        if (!clip_to_square(ray.sx, ray.sy, dx, dy, half_, a0, a1)) return;
        const double ray_len = std::hypot(dx, dy);

        fill_crossings(ray.sx, dx, a0, a1, ax_);
        fill_crossings(ray.sy, dy, a0, a1, ay_);

        merged_.clear();
        merged_.push_back(a0);
        std::merge(ax_.begin(), ax_.end(), ay_.begin(), ay_.end(), std::back_inserter(merged_));
        merged_.push_back(a1);

        double prev = merged_.front();
        for (std::size_t k = 1; k < merged_.size(); ++k) {
            const double cur = merged_[k];
            const double len = (cur - prev) * ray_len;
            if (len > 0.0) {
                const double mid = 0.5 * (prev + cur);
                const double px = ray.sx + mid * dx;
                const double py = ray.sy + mid * dy;
                int c = static_cast<int>(std::floor((px + half_) / spacing_));
                int r = static_cast<int>(std::floor((half_ - py) / spacing_));
                c = std::clamp(c, 0, n_ - 1);
                r = std::clamp(r, 0, n_ - 1);
                visit(r, c, len);
            }
            prev = cur;
        }
    }

    // Crossing parameters with the grid lines s + a*d = -half + i*spacing,
    // strictly inside (a0, a1), ascending.
    void fill_crossings(double s, double d, double a0, double a1, std::vector<double>& out) {
        out.clear();
        if (std::abs(d) < 1e-300) return;
        const double p0 = s + a0 * d;
        const double p1 = s + a1 * d;
        const double lo = std::min(p0, p1), hi = std::max(p0, p1);
        int i_lo = static_cast<int>(std::ceil((lo + half_) / spacing_));
        int i_hi = static_cast<int>(std::floor((hi + half_) / spacing_));
        i_lo = std::max(i_lo, 0);
        i_hi = std::min(i_hi, n_);
        if (d > 0.0) {
            for (int i = i_lo; i <= i_hi; ++i) {
                const double a = (-half_ + i * spacing_ - s) / d;
                if (a > a0 && a < a1) out.push_back(a);
            }
        } else {
            for (int i = i_hi; i >= i_lo; --i) {
                const double a = (-half_ + i * spacing_ - s) / d;
                if (a > a0 && a < a1) out.push_back(a);
            }
        }
    }

    int n_;
    double spacing_;
    double half_;
    std::vector<double> ax_, ay_, merged_;
};

}  // namespace detail

/// Ray-driven fan-beam forward projection. Entry (v, d) is the Siddon
/// path-length-weighted sum of pixel values along the ray from source
/// position v to detector bin d.
inline Sinogram radon_forward(const Image& img, const FanGeometry& geom) {
    geom.validate();
    require(img.width == geom.image_size && img.height == geom.image_size,
            "radon_forward: image size does not match geometry");
    Sinogram sino(geom.num_views, geom.num_detectors);
    detail::SiddonTracer tracer(geom);
    for (int v = 0; v < geom.num_views; ++v) {
        for (int d = 0; d < geom.num_detectors; ++d) {
            sino.values(v, d) = tracer.trace(detail::fan_ray(geom, v, d), img.values);
        }
    }
    return sino;
}

/// Exact intersection length of the (view, det) ray with the image square.
inline double siddon_path_length(const FanGeometry& geom, int view, int det) {
    detail::SiddonTracer tracer(geom);
    return tracer.path_length(detail::fan_ray(geom, view, det));
}

}  // namespace sinodiff
