#include "cartex/noise.hpp"

#include <cmath>
#include <random>

#include "patch_ssd.hpp"

namespace cartex {

Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
    Image out = img;
    if (sigma == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (double& v : out.pixels()) v += normal(rng);
    return out;
}

Image pre_denoise(const Image& img, double sigma, const NlmParams& params) {
    if (!(sigma > 0.0)) throw std::invalid_argument("pre_denoise: sigma must be positive");
    if (params.patch < 1 || params.patch % 2 == 0 || params.search < 1 || params.search % 2 == 0) {
        throw std::invalid_argument("pre_denoise: patch and search sizes must be odd");
    }
    const int r = params.patch / 2;
    const int s = params.search / 2;
    const int w = img.width();
    const int h = img.height();
    const double area = static_cast<double>(params.patch) * params.patch;
    const double bias = 2.0 * sigma * sigma;
    const double filter = params.filter_scale * sigma * sigma;

    const detail::ReplicatedImage ext(img, r + s);
    detail::OffsetPatchSsd ssd(w, h, r);
    std::vector<double> acc(img.size(), 0.0);
    std::vector<double> wsum(img.size(), 0.0);
    for (int dy = -s; dy <= s; ++dy) {
        for (int dx = -s; dx <= s; ++dx) {
            ssd.compute(ext, nullptr, dx, dy);
            const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
            const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    const std::size_t i = img.index(x, y);
                    const double d = ssd.ssd(i) / area;
                    const double weight = std::exp(-std::max(d - bias, 0.0) / filter);
                    acc[i] += weight * img(x + dx, y + dy);
                    wsum[i] += weight;
                }
            }
        }
    }
    Image out(w, h);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i] / wsum[i];
    return out;
}

}  // namespace cartex
