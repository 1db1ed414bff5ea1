#include "cartex/wavelet_frame.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace cartex {

double Kernel2D::sum() const { return std::accumulate(taps.begin(), taps.end(), 0.0); }

Kernel2D Kernel2D::tensor(std::vector<double> column, std::vector<double> row) {
    if (column.size() != row.size() || column.size() % 2 == 0) {
        throw std::invalid_argument("tensor kernel factors must share an odd length");
    }
    Kernel2D k;
    k.radius = static_cast<int>(column.size() / 2);
    const int n = k.support();
    k.taps.resize(static_cast<std::size_t>(n * n));
    for (int dy = 0; dy < n; ++dy) {
        for (int dx = 0; dx < n; ++dx) k.taps[dy * n + dx] = column[dy] * row[dx];
    }
    k.column = std::move(column);
    k.row = std::move(row);
    return k;
}

FilterBank::FilterBank(std::vector<Kernel2D> filters) : filters_(std::move(filters)) {
    if (filters_.empty()) throw std::invalid_argument("filter bank needs at least one filter");
    for (const auto& f : filters_) {
        if (f.radius < 0 || f.taps.size() != static_cast<std::size_t>(f.support() * f.support())) {
            throw std::invalid_argument("kernel taps do not match its odd support");
        }
    }
}

int FilterBank::max_radius() const {
    int r = 0;
    for (const auto& f : filters_) r = std::max(r, f.radius);
    return r;
}

FilterBank build_spline_bank() {
    const double q = std::sqrt(2.0) / 4.0;
    const std::array<std::array<double, 3>, 3> one_d{{
        {0.25, 0.5, 0.25},
        {q, 0.0, -q},
        {-0.25, 0.5, -0.25},
    }};
    std::vector<Kernel2D> filters;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            filters.push_back(Kernel2D::tensor({one_d[i].begin(), one_d[i].end()},
                                               {one_d[j].begin(), one_d[j].end()}));
        }
    }
    return FilterBank(std::move(filters));
}

CoefficientField::CoefficientField(std::size_t channels, int width, int height, double fill)
    : channels_(channels), width_(width), height_(height),
      data_(channels * static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

bool CoefficientField::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

CoefficientField& CoefficientField::operator+=(const CoefficientField& o) {
    if (!same_shape(o)) throw std::invalid_argument("coefficient field shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

CoefficientField& CoefficientField::operator-=(const CoefficientField& o) {
    if (!same_shape(o)) throw std::invalid_argument("coefficient field shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

CoefficientField& CoefficientField::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

namespace {

// wrap[o + r][x] = (x + o) mod n for offsets o in [-r, r].
std::vector<std::vector<int>> wrap_table(int n, int r) {
    std::vector<std::vector<int>> t(static_cast<std::size_t>(2 * r + 1), std::vector<int>(n));
    for (int o = -r; o <= r; ++o) {
        for (int x = 0; x < n; ++x) t[o + r][x] = ((x + o) % n + n) % n;
    }
    return t;
}


// Taps are accumulated left to right, which keeps the spline high-pass
// responses to a constant signal exactly zero.
void correlate_rows(const double* src, double* dst, int w, int h, const std::vector<double>& taps,
                    const std::vector<std::vector<int>>& wx, int rmax, bool transpose) {
    const int r = static_cast<int>(taps.size() / 2);
    for (int y = 0; y < h; ++y) {
        const double* in = src + static_cast<std::size_t>(y) * w;
        double* out = dst + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int o = -r; o <= r; ++o) {
                const int xs = wx[rmax + (transpose ? -o : o)][x];
                s += taps[o + r] * in[xs];
            }
            out[x] = s;
        }
    }
}

void correlate_cols(const double* src, double* dst, int w, int h, const std::vector<double>& taps,
                    const std::vector<std::vector<int>>& wy, int rmax, bool transpose) {
    const int r = static_cast<int>(taps.size() / 2);
    for (int y = 0; y < h; ++y) {
        double* out = dst + static_cast<std::size_t>(y) * w;
        std::fill(out, out + w, 0.0);
        for (int o = -r; o <= r; ++o) {
            const double a = taps[o + r];
            const double* in = src + static_cast<std::size_t>(wy[rmax + (transpose ? -o : o)][y]) * w;
            for (int x = 0; x < w; ++x) out[x] += a * in[x];
        }
    }
}

bool all_separable(const FilterBank& bank) {
    return std::all_of(bank.filters().begin(), bank.filters().end(),
                       [](const Kernel2D& k) { return k.separable(); });
}

}  // namespace

CoefficientField analyze(const Image& img, const FilterBank& bank) {
    const int w = img.width();
    const int h = img.height();
    const int rmax = bank.max_radius();
    if (w < 2 * rmax + 1 || h < 2 * rmax + 1) throw std::invalid_argument("image smaller than filter support");
    const auto wx = wrap_table(w, rmax);
    const auto wy = wrap_table(h, rmax);
    CoefficientField out(bank.channels(), w, h);
    const auto src = img.pixels();
    if (all_separable(bank)) {
        std::vector<double> tmp(img.size());
        for (std::size_t k = 0; k < bank.channels(); ++k) {
            const Kernel2D& f = bank.filter(k);
            correlate_rows(src.data(), tmp.data(), w, h, f.row, wx, rmax, false);
            correlate_cols(tmp.data(), out.plane(k).data(), w, h, f.column, wy, rmax, false);
        }
        return out;
    }
    for (std::size_t k = 0; k < bank.channels(); ++k) {
        const Kernel2D& f = bank.filter(k);
        auto dst = out.plane(k);
        for (int dy = -f.radius; dy <= f.radius; ++dy) {
            for (int dx = -f.radius; dx <= f.radius; ++dx) {
                const double a = f.tap(dx, dy);
                if (a == 0.0) continue;
                const auto& cols = wx[dx + rmax];
                for (int y = 0; y < h; ++y) {
                    const double* row = src.data() + static_cast<std::size_t>(wy[dy + rmax][y]) * w;
                    double* o = dst.data() + static_cast<std::size_t>(y) * w;
                    for (int x = 0; x < w; ++x) o[x] += a * row[cols[x]];
                }
            }
        }
    }
    return out;
}

Image synthesize(const CoefficientField& coeffs, const FilterBank& bank) {
    if (coeffs.channels() != bank.channels()) {
        throw std::invalid_argument("coefficient channel count does not match filter bank");
    }
    const int w = coeffs.width();
    const int h = coeffs.height();
    const int rmax = bank.max_radius();
    const auto wx = wrap_table(w, rmax);
    const auto wy = wrap_table(h, rmax);
    Image out(w, h, 0.0);
    auto dst = out.pixels();
    if (all_separable(bank)) {
        std::vector<double> tmp(out.size()), tmp2(out.size());
        for (std::size_t k = 0; k < bank.channels(); ++k) {
            const Kernel2D& f = bank.filter(k);
            correlate_cols(coeffs.plane(k).data(), tmp.data(), w, h, f.column, wy, rmax, true);
            correlate_rows(tmp.data(), tmp2.data(), w, h, f.row, wx, rmax, true);
            for (std::size_t i = 0; i < out.size(); ++i) dst[i] += tmp2[i];
        }
        return out;
    }
    for (std::size_t k = 0; k < bank.channels(); ++k) {
        const Kernel2D& f = bank.filter(k);
        const auto src = coeffs.plane(k);
        for (int dy = -f.radius; dy <= f.radius; ++dy) {
            for (int dx = -f.radius; dx <= f.radius; ++dx) {
                const double a = f.tap(dx, dy);
                if (a == 0.0) continue;
                // Transpose of o(x,y) += a * s(x+dx, y+dy): gather from x-dx, y-dy.
                const auto& cols = wx[rmax - dx];
                for (int y = 0; y < h; ++y) {
                    const double* row = src.data() + static_cast<std::size_t>(wy[rmax - dy][y]) * w;
                    double* o = dst.data() + static_cast<std::size_t>(y) * w;
                    for (int x = 0; x < w; ++x) o[x] += a * row[cols[x]];
                }
            }
        }
    }
    return out;
}

}  // namespace cartex
