#pragma once

// Internal helpers for patch distances under edge replication.

#include <algorithm>
#include <vector>

#include "cartex/image.hpp"

namespace cartex::detail {

/// Image extended by edge replication on every side by `pad` pixels.
class ReplicatedImage {
public:
    ReplicatedImage(const Image& img, int pad) : width_(img.width()), height_(img.height()), pad_(pad) {
        stride_ = width_ + 2 * pad;
        data_.resize(static_cast<std::size_t>(stride_) * (height_ + 2 * pad));
        for (int y = -pad; y < height_ + pad; ++y) {
            const int sy = std::clamp(y, 0, height_ - 1);
            for (int x = -pad; x < width_ + pad; ++x) {
                const int sx = std::clamp(x, 0, width_ - 1);
                at(x, y) = img(sx, sy);
            }
        }
    }

    double& at(int x, int y) {
        return data_[static_cast<std::size_t>(y + pad_) * stride_ + (x + pad_)];
    }
    double at(int x, int y) const {
        return data_[static_cast<std::size_t>(y + pad_) * stride_ + (x + pad_)];
    }
    const double* row(int y) const { return data_.data() + static_cast<std::size_t>(y + pad_) * stride_ + pad_; }

    int width() const { return width_; }
    int height() const { return height_; }
    int pad() const { return pad_; }

private:
    int width_, height_, pad_, stride_ = 0;
    std::vector<double> data_;
};

/// For one displacement (dx,dy), computes for every pixel p the sums over the
/// (2r+1)^2 patch around p of w(p+t) w(p+d+t) (a(p+t) - a(p+d+t))^2 and of
/// the overlap weights. Without a mask only the squared-difference sums are
/// produced. Summation order is fixed (rows, then columns), so identical
/// zero-difference patches give exactly 0.
class OffsetPatchSsd {
public:
    OffsetPatchSsd(int width, int height, int radius)
        : width_(width), height_(height), radius_(radius),
          ext_w_(width + 2 * radius), ext_h_(height + 2 * radius),
          diff_(static_cast<std::size_t>(ext_w_) * ext_h_),
          wdiff_(diff_.size()),
          hsum_(static_cast<std::size_t>(width) * ext_h_),
          whsum_(hsum_.size()),
          ssd_(static_cast<std::size_t>(width) * height),
          overlap_(ssd_.size()) {}

    void compute(const ReplicatedImage& img, const ReplicatedImage* mask, int dx, int dy) {
        const int r = radius_;
        for (int ey = 0; ey < ext_h_; ++ey) {
            const int y = ey - r;
            const double* a = img.row(y);
            const double* b = img.row(y + dy);
            double* out = diff_.data() + static_cast<std::size_t>(ey) * ext_w_;
            if (mask) {
                const double* ma = mask->row(y);
                const double* mb = mask->row(y + dy);
                double* wout = wdiff_.data() + static_cast<std::size_t>(ey) * ext_w_;
                for (int x = -r; x < width_ + r; ++x) {
                    const double w = ma[x] * mb[x + dx];
                    const double d = a[x] - b[x + dx];
                    out[x + r] = w * d * d;
                    wout[x + r] = w;
                }
            } else {
                for (int x = -r; x < width_ + r; ++x) {
                    const double d = a[x] - b[x + dx];
                    out[x + r] = d * d;
                }
            }
        }
        box_sum(diff_, hsum_, ssd_);
        if (mask) box_sum(wdiff_, whsum_, overlap_);
    }

    /// Patch sums for pixel index i (row-major in the image).
    double ssd(std::size_t i) const { return ssd_[i]; }
    double overlap(std::size_t i) const { return overlap_[i]; }
    const std::vector<double>& ssd() const { return ssd_; }

private:
    void box_sum(const std::vector<double>& src, std::vector<double>& tmp,
                 std::vector<double>& dst) const {
        const int taps = 2 * radius_ + 1;
        for (int ey = 0; ey < ext_h_; ++ey) {
            const double* in = src.data() + static_cast<std::size_t>(ey) * ext_w_;
            double* out = tmp.data() + static_cast<std::size_t>(ey) * width_;
            for (int x = 0; x < width_; ++x) {
                double s = 0.0;
                for (int k = 0; k < taps; ++k) s += in[x + k];
                out[x] = s;
            }
        }
        for (int y = 0; y < height_; ++y) {
            double* out = dst.data() + static_cast<std::size_t>(y) * width_;
            std::fill(out, out + width_, 0.0);
            for (int k = 0; k < taps; ++k) {
                const double* in = tmp.data() + static_cast<std::size_t>(y + k) * width_;
                for (int x = 0; x < width_; ++x) out[x] += in[x];
            }
        }
    }

    int width_, height_, radius_, ext_w_, ext_h_;
    std::vector<double> diff_, wdiff_, hsum_, whsum_, ssd_, overlap_;
};

}  // namespace cartex::detail
