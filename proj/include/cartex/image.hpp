#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cartex {

/// Raised when an iterate or intermediate quantity stops being finite.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major grayscale image. Samples are nominally in [0,1] but signed
/// components (texture, noise) use the same type.
class Image {
public:
    static constexpr int kMinSide = 8;

    Image() = default;
    Image(int width, int height, double fill = 0.0);
    Image(int width, int height, std::vector<double> data);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int x, int y) { return data_[index(x, y)]; }
    double operator()(int x, int y) const { return data_[index(x, y)]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    std::span<double> pixels() { return data_; }
    std::span<const double> pixels() const { return data_; }

    bool same_shape(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool all_finite() const;
    double mean() const;
    double min() const;
    double max() const;

    Image& operator+=(const Image& other);
    Image& operator-=(const Image& other);
    Image& operator*=(double s);
    Image& operator+=(double s);
    Image& operator-=(double s) { return *this += -s; }

    friend Image operator+(Image a, const Image& b) { return a += b; }
    friend Image operator-(Image a, const Image& b) { return a -= b; }
    friend Image operator*(Image a, double s) { return a *= s; }
    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

Image clamp01(Image img);

/// Observation mask; true marks a measured pixel.
class PixelMask {
public:
    PixelMask() = default;
    PixelMask(int width, int height, bool known = true);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return known_.size(); }

    bool known(int x, int y) const { return known_[index(x, y)] != 0; }
    bool known(std::size_t i) const { return known_[i] != 0; }
    void set(int x, int y, bool value) { known_[index(x, y)] = value ? 1 : 0; }
    void set(std::size_t i, bool value) { known_[i] = value ? 1 : 0; }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    bool matches(const Image& img) const {
        return width_ == img.width() && height_ == img.height();
    }
    std::size_t known_count() const;
    double known_fraction() const;
    bool all_known() const { return known_count() == known_.size(); }

    /// Uniformly random mask with the given fraction of missing pixels.
    static PixelMask random(int width, int height, double missing_fraction,
                            unsigned long long seed);

    /// Image interpretation: samples > 0.5 are known.
    static PixelMask from_image(const Image& img);
    Image to_image() const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<unsigned char> known_;
};

/// Known pixels keep their value, unknown pixels become zero.
Image zero_fill(const Image& img, const PixelMask& mask);

/// Unknown pixels take the mean of their already filled 8-neighbours, grown
/// inward from the known set, then `sweeps` Jacobi averaging passes over the
/// unknown pixels only. Known pixels are never changed.
Image neighbour_fill(const Image& img, const PixelMask& mask, int sweeps = 20);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace cartex
