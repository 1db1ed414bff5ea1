#pragma once

#include "cartex/image.hpp"

namespace cartex {

/// Reported PSNR for identical images.
inline constexpr double kPsnrCap = 99.0;

/// 10 log10(peak^2 / MSE), capped at kPsnrCap.
double psnr(const Image& a, const Image& b, double peak = 1.0);

double mse(const Image& a, const Image& b);

/// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5, K1 0.01,
/// K2 0.03, dynamic range 1).
double ssim(const Image& a, const Image& b);

}  // namespace cartex
