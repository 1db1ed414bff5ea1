#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cartex/nonlocal_graph.hpp"

namespace cartex {

namespace {

// Distances exactly on the band boundary count as inside.
constexpr double kBoundaryEps = 1e-9;

}  // namespace

PartitionMasks::PartitionMasks(int window, int directions, int band_halfwidth)
    : window_(window), directions_(directions), band_halfwidth_(band_halfwidth) {
    if (window < 3 || window % 2 == 0) throw std::invalid_argument("search window must be odd and >= 3");
    if (directions < 2) throw std::invalid_argument("need at least 2 directions");
    if (band_halfwidth < 0 || window < 2 * band_halfwidth + 3) {
        throw std::invalid_argument("band half-width too large for the search window");
    }
    const int r = window / 2;
    label_.assign(static_cast<std::size_t>(window) * window, -1);
    offsets_.assign(static_cast<std::size_t>(directions) + 1, {});
    std::vector<double> dist(static_cast<std::size_t>(directions));
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int inside = 0;
            int nearest = -1;
            for (int j = 1; j <= directions; ++j) {
                const double a = band_angle(j);
                const double d = std::abs(-dx * std::sin(a) + dy * std::cos(a));
                dist[j - 1] = d;
                if (d <= band_halfwidth + kBoundaryEps) {
                    ++inside;
                    if (nearest < 0 || d < dist[nearest - 1] - kBoundaryEps) nearest = j;
                }
            }
            int region = -1;
            if (inside == directions) {
                region = 0;
            } else if (inside > 0) {
                region = nearest;
            }
            label_[static_cast<std::size_t>(dy + r) * window + (dx + r)] = region;
            if (region >= 0) offsets_[static_cast<std::size_t>(region)].push_back({dx, dy});
        }
    }
}

double PartitionMasks::band_angle(int j) const {
    return (j - 1) * std::numbers::pi / directions_;
}

int PartitionMasks::region_of(int dx, int dy) const {
    const int r = window_ / 2;
    if (dx < -r || dx > r || dy < -r || dy > r) return -1;
    return label_[static_cast<std::size_t>(dy + r) * window_ + (dx + r)];
}

PartitionMasks build_partition(int window, int directions, int band_halfwidth) {
    return PartitionMasks(window, directions, band_halfwidth);
}

}  // namespace cartex
