#include "cartex/metrics.hpp"

#include <array>
#include <cmath>

namespace cartex {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow> gaussian_taps() {
    std::array<double, kWindow> taps{};
    double sum = 0.0;
    for (int k = 0; k < kWindow; ++k) {
        const double t = k - kWindow / 2;
        taps[k] = std::exp(-t * t / (2.0 * kSigma * kSigma));
        sum += taps[k];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// Separable Gaussian filter over the valid region only.
std::vector<double> filter_valid(const std::vector<double>& src, int width, int height,
                                 const std::array<double, kWindow>& taps) {
    const int ow = width - kWindow + 1;
    const int oh = height - kWindow + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * height);
    for (int y = 0; y < height; ++y) {
        const double* row = src.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWindow; ++k) s += taps[k] * row[x + k];
            tmp[static_cast<std::size_t>(y) * ow + x] = s;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWindow; ++k) s += taps[k] * tmp[static_cast<std::size_t>(y + k) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    }
    return out;
}

}  // namespace

double mse(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("mse: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

double psnr(const Image& a, const Image& b, double peak) {
    const double m = mse(a, b);
    if (m == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / m));
}

double ssim(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: dimension mismatch");
    if (a.width() < kWindow || a.height() < kWindow) {
        throw std::invalid_argument("ssim: images must be at least 11x11");
    }
    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    const int w = a.width();
    const int h = a.height();
    const std::size_t n = a.size();
    std::vector<double> va(a.pixels().begin(), a.pixels().end());
    std::vector<double> vb(b.pixels().begin(), b.pixels().end());
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = va[i] * va[i];
        bb[i] = vb[i] * vb[i];
        ab[i] = va[i] * vb[i];
    }
    const auto taps = gaussian_taps();
    const auto mu_a = filter_valid(va, w, h, taps);
    const auto mu_b = filter_valid(vb, w, h, taps);
    const auto s_aa = filter_valid(aa, w, h, taps);
    const auto s_bb = filter_valid(bb, w, h, taps);
    const auto s_ab = filter_valid(ab, w, h, taps);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double var_a = s_aa[i] - ma * ma;
        const double var_b = s_bb[i] - mb * mb;
        const double cov = s_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

}  // namespace cartex
