#include "cartex/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cartex {

namespace {

void check_dims(int width, int height) {
    if (width < Image::kMinSide || height < Image::kMinSide) {
        throw std::invalid_argument("image must be at least 8x8, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
}

void check_same(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("image dimension mismatch");
}

}  // namespace

Image::Image(int width, int height, double fill)
    : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("image data size does not match dimensions");
    }
}

bool Image::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Image::mean() const {
    if (data_.empty()) return 0.0;
    return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

double Image::min() const { return *std::min_element(data_.begin(), data_.end()); }
double Image::max() const { return *std::max_element(data_.begin(), data_.end()); }

Image& Image::operator+=(const Image& other) {
    check_same(*this, other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Image& Image::operator-=(const Image& other) {
    check_same(*this, other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Image& Image::operator+=(double s) {
    for (double& v : data_) v += s;
    return *this;
}

Image& Image::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Image clamp01(Image img) {
    for (double& v : img.pixels()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

PixelMask::PixelMask(int width, int height, bool known) : width_(width), height_(height) {
    check_dims(width, height);
    known_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                  known ? 1 : 0);
}

std::size_t PixelMask::known_count() const {
    return static_cast<std::size_t>(std::count(known_.begin(), known_.end(), 1));
}

double PixelMask::known_fraction() const {
    return known_.empty() ? 0.0
                          : static_cast<double>(known_count()) / static_cast<double>(known_.size());
}

PixelMask PixelMask::random(int width, int height, double missing_fraction,
                            unsigned long long seed) {
    if (missing_fraction < 0.0 || missing_fraction > 1.0) {
        throw std::invalid_argument("missing fraction must lie in [0,1]");
    }
    PixelMask mask(width, height, true);
    // Exact count of missing pixels: shuffle indices and drop the first ones.
    std::vector<std::size_t> order(mask.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto missing =
        static_cast<std::size_t>(std::llround(missing_fraction * static_cast<double>(mask.size())));
    for (std::size_t k = 0; k < missing; ++k) mask.known_[order[k]] = 0;
    return mask;
}

PixelMask PixelMask::from_image(const Image& img) {
    PixelMask mask(img.width(), img.height(), true);
    for (std::size_t i = 0; i < img.size(); ++i) mask.known_[i] = img[i] > 0.5 ? 1 : 0;
    return mask;
}

Image PixelMask::to_image() const {
    Image img(width_, height_);
    for (std::size_t i = 0; i < known_.size(); ++i) img[i] = known_[i] ? 1.0 : 0.0;
    return img;
}

Image zero_fill(const Image& img, const PixelMask& mask) {
    if (!mask.matches(img)) throw std::invalid_argument("mask dimension mismatch");
    Image out = img;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!mask.known(i)) out[i] = 0.0;
    }
    return out;
}

Image neighbour_fill(const Image& img, const PixelMask& mask, int sweeps) {
    if (!mask.matches(img)) throw std::invalid_argument("mask dimension mismatch");
    if (mask.known_count() == 0) throw std::invalid_argument("mask has no known pixels");
    if (sweeps < 0) throw std::invalid_argument("sweeps must be non-negative");
    const int w = img.width();
    const int h = img.height();
    Image out = zero_fill(img, mask);
    std::vector<unsigned char> filled(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) filled[i] = mask.known(i) ? 1 : 0;

    // Mean of filled 8-neighbours of (x, y); false when there are none.
    auto neighbour_mean = [&](int x, int y, double& mean) {
        double s = 0.0;
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int xx = x + dx, yy = y + dy;
                if ((dx == 0 && dy == 0) || xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
                const std::size_t q = out.index(xx, yy);
                if (!filled[q]) continue;
                s += out[q];
                ++n;
            }
        }
        if (n == 0) return false;
        mean = s / n;
        return true;
    };

    std::vector<std::pair<std::size_t, double>> ring;
    for (bool grew = true; grew;) {
        ring.clear();
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = out.index(x, y);
                double mean = 0.0;
                if (!filled[i] && neighbour_mean(x, y, mean)) ring.emplace_back(i, mean);
            }
        }
        for (const auto& [i, mean] : ring) {
            out[i] = mean;
            filled[i] = 1;
        }
        grew = !ring.empty();
    }
    for (int s = 0; s < sweeps; ++s) {
        Image next = out;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = out.index(x, y);
                double mean = 0.0;
                if (!mask.known(i) && neighbour_mean(x, y, mean)) next[i] = mean;
            }
        }
        out = std::move(next);
    }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace cartex
