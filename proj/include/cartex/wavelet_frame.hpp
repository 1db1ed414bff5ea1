#pragma once

#include <span>
#include <vector>

#include "cartex/image.hpp"

namespace cartex {

/// Square kernel with odd support, anchored at its centre.
/// tap(dx, dy) is the weight at horizontal offset dx, vertical offset dy.
struct Kernel2D {
    int radius = 1;
    std::vector<double> taps;  // (2r+1)^2, row-major in (dy, dx)
    // Optional tensor factors: tap(dx, dy) = column[dy + r] * row[dx + r].
    std::vector<double> column;
    std::vector<double> row;

    static Kernel2D tensor(std::vector<double> column, std::vector<double> row);
    bool separable() const { return !column.empty(); }

    int support() const { return 2 * radius + 1; }
    double tap(int dx, int dy) const {
        return taps[static_cast<std::size_t>((dy + radius) * support() + (dx + radius))];
    }
    double sum() const;
};

/// Undecimated filter bank; channel 0 is the low-pass filter.
class FilterBank {
public:
    explicit FilterBank(std::vector<Kernel2D> filters);

    std::size_t channels() const { return filters_.size(); }
    const Kernel2D& filter(std::size_t k) const { return filters_[k]; }
    const std::vector<Kernel2D>& filters() const { return filters_; }
    int max_radius() const;

private:
    std::vector<Kernel2D> filters_;
};

/// Single-level linear spline tight frame: the nine tensor products of
/// (1,2,1)/4, sqrt(2)/4 (1,0,-1) and (-1,2,-1)/4. Channel index is
/// 3*i + j for vertical filter i and horizontal filter j.
FilterBank build_spline_bank();

/// m stacked coefficient planes over the image grid (plane-major).
class CoefficientField {
public:
    CoefficientField() = default;
    CoefficientField(std::size_t channels, int width, int height, double fill = 0.0);

    std::size_t channels() const { return channels_; }
    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t plane_size() const {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    std::size_t size() const { return data_.size(); }

    std::span<double> plane(std::size_t k) { return {data_.data() + k * plane_size(), plane_size()}; }
    std::span<const double> plane(std::size_t k) const {
        return {data_.data() + k * plane_size(), plane_size()};
    }
    double& at(std::size_t k, std::size_t i) { return data_[k * plane_size() + i]; }
    double at(std::size_t k, std::size_t i) const { return data_[k * plane_size() + i]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool same_shape(const CoefficientField& o) const {
        return channels_ == o.channels_ && width_ == o.width_ && height_ == o.height_;
    }
    bool all_finite() const;

    CoefficientField& operator+=(const CoefficientField& o);
    CoefficientField& operator-=(const CoefficientField& o);
    CoefficientField& operator*=(double s);
    friend CoefficientField operator+(CoefficientField a, const CoefficientField& b) { return a += b; }
    friend CoefficientField operator-(CoefficientField a, const CoefficientField& b) { return a -= b; }
    friend CoefficientField operator*(CoefficientField a, double s) { return a *= s; }
    friend bool operator==(const CoefficientField&, const CoefficientField&) = default;

private:
    std::size_t channels_ = 0;
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Channel k = periodic correlation of img with filter k:
///   c_k(x, y) = sum_{dx,dy} a_k(dx, dy) img(x + dx, y + dy).
CoefficientField analyze(const Image& img, const FilterBank& bank);

/// Exact transpose of analyze under periodic boundaries.
Image synthesize(const CoefficientField& coeffs, const FilterBank& bank);

}  // namespace cartex
