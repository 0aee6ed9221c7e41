#pragma once

#include <json.hpp>

#include "sinodiff/core.hpp"

namespace sinodiff {

struct MetricReport {
    double psnr = 0.0;  // +inf when inputs are identical
    double ssim = 0.0;
    double mse  = 0.0;
};

inline void to_json(nlohmann::json& j, const MetricReport& m) {
    j = nlohmann::json::object();
    if (std::isinf(m.psnr)) {
        j["psnr"]      = nullptr;
        j["identical"] = true;
    } else {
        j["psnr"] = m.psnr;
    }
    j["ssim"] = m.ssim;
    j["mse"]  = m.mse;
}

inline double mse(const ArrayRM& ref, const ArrayRM& test) {
    require(ref.rows() == test.rows() && ref.cols() == test.cols(), "mse: dimension mismatch");
    return (ref - test).square().mean();
}

/// 20*log10(MAX(ref)/RMSE). Identical inputs report +infinity.
inline double psnr(const ArrayRM& ref, const ArrayRM& test) {
    const double err = mse(ref, test);
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    const double peak = ref.maxCoeff();
    require(peak > 0.0, "psnr: reference maximum must be positive");
    return 20.0 * std::log10(peak / std::sqrt(err));
}

namespace detail {

inline std::vector<double> gaussian_window_1d(int size, double sigma) {
    std::vector<double> w(size);
    const double c = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        w[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Separable valid-region Gaussian filter.
inline ArrayRM gauss_filter_valid(const ArrayRM& x, const std::vector<double>& w) {
    const int k = static_cast<int>(w.size());
    const Index rows = x.rows(), cols = x.cols();
    ArrayRM horiz(rows, cols - k + 1);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c + k <= cols; ++c) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += w[i] * x(r, c + i);
            horiz(r, c) = acc;
        }
    }
    ArrayRM out(rows - k + 1, cols - k + 1);
    for (Index r = 0; r + k <= rows; ++r) {
        for (Index c = 0; c < horiz.cols(); ++c) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += w[i] * horiz(r + i, c);
            out(r, c) = acc;
        }
    }
    return out;
}

}  // namespace detail

/// Mean of the local SSIM map over an 11x11 Gaussian window (sigma = 1.5),
/// c1 = (0.01 L)^2, c2 = (0.03 L)^2 with L = MAX(ref).
inline double ssim(const ArrayRM& ref, const ArrayRM& test) {
    require(ref.rows() == test.rows() && ref.cols() == test.cols(), "ssim: dimension mismatch");
    constexpr int kWindow = 11;
    require(ref.rows() >= kWindow && ref.cols() >= kWindow, "ssim: image smaller than window");
    const double peak = ref.maxCoeff();
    const double L    = peak > 0.0 ? peak : 1.0;
    const double c1   = (0.01 * L) * (0.01 * L);
    const double c2   = (0.03 * L) * (0.03 * L);

    const auto w = detail::gaussian_window_1d(kWindow, 1.5);
    const ArrayRM mu1   = detail::gauss_filter_valid(ref, w);
    const ArrayRM mu2   = detail::gauss_filter_valid(test, w);
    const ArrayRM e11   = detail::gauss_filter_valid(ref * ref, w);
    const ArrayRM e22   = detail::gauss_filter_valid(test * test, w);
    const ArrayRM e12   = detail::gauss_filter_valid(ref * test, w);
    const ArrayRM var1  = e11 - mu1 * mu1;
    const ArrayRM var2  = e22 - mu2 * mu2;
    const ArrayRM covar = e12 - mu1 * mu2;

    const ArrayRM num = (2.0 * mu1 * mu2 + c1) * (2.0 * covar + c2);
    const ArrayRM den = (mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2);
    return (num / den).mean();
}

inline double mse(const Image& a, const Image& b) { return mse(a.values, b.values); }
inline double mse(const Sinogram& a, const Sinogram& b) { return mse(a.values, b.values); }
inline double psnr(const Image& a, const Image& b) { return psnr(a.values, b.values); }
inline double psnr(const Sinogram& a, const Sinogram& b) { return psnr(a.values, b.values); }
inline double ssim(const Image& a, const Image& b) { return ssim(a.values, b.values); }
inline double ssim(const Sinogram& a, const Sinogram& b) { return ssim(a.values, b.values); }

inline MetricReport compute_metrics(const ArrayRM& ref, const ArrayRM& test) {
    return MetricReport{psnr(ref, test), ssim(ref, test), mse(ref, test)};
}

}  // namespace sinodiff
