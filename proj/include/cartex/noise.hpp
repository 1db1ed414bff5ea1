#pragma once

#include <cstdint>

#include "cartex/image.hpp"

namespace cartex {

/// img + n, n i.i.d. N(0, sigma^2) drawn from a seeded mt19937_64. Not clamped.
Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed);

struct NlmParams {
    int patch = 7;
    int search = 21;
    /// Filtering parameter as a multiple of sigma^2.
    double filter_scale = 0.35;
};

/// Nonlocal-means smoothing used to stabilise patch matching on noisy input.
/// Weights are exp(-max(d - 2 sigma^2, 0) / (filter_scale sigma^2)) with d the
/// per-pixel mean squared patch difference; patches use edge replication.
Image pre_denoise(const Image& img, double sigma, const NlmParams& params = {});

}  // namespace cartex
