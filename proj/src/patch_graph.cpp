#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "cartex/nonlocal_graph.hpp"
#include "patch_ssd.hpp"

namespace cartex {

double patch_distance(const Image& img, int ix, int iy, int qx, int qy, int patch) {
    if (patch < 1 || patch % 2 == 0) throw std::invalid_argument("patch size must be odd");
    const int r = patch / 2;
    auto sample = [&](int x, int y) {
        return img(std::clamp(x, 0, img.width() - 1), std::clamp(y, 0, img.height() - 1));
    };
    double s = 0.0;
    for (int ty = -r; ty <= r; ++ty) {
        for (int tx = -r; tx <= r; ++tx) {
            const double d = sample(ix + tx, iy + ty) - sample(qx + tx, qy + ty);
            s += d * d;
        }
    }
    return s / (static_cast<double>(patch) * patch);
}

PatchGraph::PatchGraph(int width, int height, int regions, int knn)
    : width_(width), height_(height), regions_(regions), knn_(knn) {
    if (regions < 1 || knn < 1 || knn > std::numeric_limits<std::uint16_t>::max()) {
        throw std::invalid_argument("invalid patch graph shape");
    }
    const std::size_t slots = pixels() * static_cast<std::size_t>(regions);
    entries_.resize(slots * static_cast<std::size_t>(knn));
    counts_.assign(slots, 0);
    sums_.assign(slots, 0.0);
}

std::span<const Neighbor> PatchGraph::neighbors(std::size_t i, int region) const {
    const std::size_t s = slot(i, region);
    return {entries_.data() + s * static_cast<std::size_t>(knn_), counts_[s]};
}

double PatchGraph::weight_sum(std::size_t i, int region) const { return sums_[slot(i, region)]; }

void PatchGraph::set_neighbors(std::size_t i, int region, std::span<const Neighbor> list) {
    if (list.size() > static_cast<std::size_t>(knn_)) throw std::invalid_argument("too many neighbours");
    const std::size_t s = slot(i, region);
    std::copy(list.begin(), list.end(), entries_.begin() + static_cast<std::ptrdiff_t>(s * knn_));
    counts_[s] = static_cast<std::uint16_t>(list.size());
    double sum = 0.0;
    for (const auto& n : list) sum += n.weight;
    sums_[s] = sum;
}

namespace {

// Running sums carry round-off that depends on the intensity level; snapping
// distances to this grid makes near-ties rank by index instead.
constexpr double kDistanceGrid = 1e-12;

double snap(double d) { return std::max(std::round(d / kDistanceGrid), 0.0) * kDistanceGrid; }

struct Candidate {
    double distance;
    std::int32_t index;
    bool operator<(const Candidate& o) const {
        return distance < o.distance || (distance == o.distance && index < o.index);
    }
};

// Bounded selection of the K smallest candidates per pixel.
class TopK {
public:
    TopK(std::size_t pixels, int k) : k_(k), best_(pixels * static_cast<std::size_t>(k)), count_(pixels, 0), worst_(pixels, 0) {}

    void offer(std::size_t i, Candidate c) {
        Candidate* list = best_.data() + i * static_cast<std::size_t>(k_);
        int& n = count_[i];
        if (n < k_) {
            list[n] = c;
            if (n == 0 || list[worst_[i]] < c) worst_[i] = n;
            ++n;
            return;
        }
        if (!(c < list[worst_[i]])) return;
        list[worst_[i]] = c;
        int w = 0;
        for (int t = 1; t < k_; ++t) {
            if (list[w] < list[t]) w = t;
        }
        worst_[i] = w;
    }

    std::span<Candidate> sorted(std::size_t i) {
        Candidate* list = best_.data() + i * static_cast<std::size_t>(k_);
        std::sort(list, list + count_[i]);
        return {list, static_cast<std::size_t>(count_[i])};
    }

private:
    int k_;
    std::vector<Candidate> best_;
    std::vector<int> count_;
    std::vector<int> worst_;
};

int max_extent(const std::vector<std::vector<Offset>>& regions) {
    int m = 0;
    for (const auto& r : regions) {
        for (const auto& o : r) m = std::max({m, std::abs(o.dx), std::abs(o.dy)});
    }
    return m;
}

PatchGraph match_regions(const Image& img, const std::vector<std::vector<Offset>>& regions, int knn,
                         double h, int patch, const PixelMask* known) {
    if (knn < 1) throw std::invalid_argument("knn must be >= 1");
    if (!(h > 0.0)) throw std::invalid_argument("similarity bandwidth h must be positive");
    if (patch < 1 || patch % 2 == 0) throw std::invalid_argument("patch size must be odd");
    if (known && !known->matches(img)) throw std::invalid_argument("mask dimension mismatch");

    const int w = img.width();
    const int hgt = img.height();
    const int r = patch / 2;
    const int pad = r + max_extent(regions);
    const double area = static_cast<double>(patch) * patch;

    // Unknown pixels are zeroed so they contribute nothing to masked sums.
    const detail::ReplicatedImage source(known ? zero_fill(img, *known) : img, pad);
    std::optional<detail::ReplicatedImage> mask_ext;
    if (known) mask_ext.emplace(known->to_image(), pad);
    detail::OffsetPatchSsd ssd(w, hgt, r);

    PatchGraph graph(w, hgt, static_cast<int>(regions.size()), knn);
    std::vector<Neighbor> list;
    for (std::size_t region = 0; region < regions.size(); ++region) {
        TopK top(img.size(), knn);
        for (const Offset& o : regions[region]) {
            ssd.compute(source, known ? &*mask_ext : nullptr, o.dx, o.dy);
            const int y0 = std::max(0, -o.dy), y1 = std::min(hgt, hgt - o.dy);
            const int x0 = std::max(0, -o.dx), x1 = std::min(w, w - o.dx);
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    const std::size_t i = img.index(x, y);
                    const std::size_t q = img.index(x + o.dx, y + o.dy);
                    double d;
                    if (known) {
                        if (!known->known(q)) continue;
                        const double overlap = ssd.overlap(i);
                        if (overlap <= 0.0) continue;
                        d = ssd.ssd(i) / overlap;
                    } else {
                        d = ssd.ssd(i) / area;
                    }
                    top.offer(i, Candidate{snap(d), static_cast<std::int32_t>(q)});
                }
            }
        }
        for (std::size_t i = 0; i < img.size(); ++i) {
            list.clear();
            for (const Candidate& c : top.sorted(i)) {
                const double weight = std::max(std::exp(-c.distance / h), std::numeric_limits<double>::min());
                list.push_back({c.index, c.distance, weight});
            }
            graph.set_neighbors(i, static_cast<int>(region), list);
        }
    }
    return graph;
}

}  // namespace

PatchGraph build_patch_graph(const Image& img, const PartitionMasks& masks, int knn, double h, int patch,
                             const PixelMask* known) {
    std::vector<std::vector<Offset>> regions;
    for (int j = 0; j < masks.regions(); ++j) regions.push_back(masks.offsets(j));
    return match_regions(img, regions, knn, h, patch, known);
}

PatchGraph build_patch_graph(const Image& img, const GraphParams& params, const PixelMask* known) {
    const PartitionMasks masks(params.window, params.directions, params.band_halfwidth);
    if (params.isotropic) return build_patch_graph(img, masks, params.knn, params.h, params.patch, known);
    std::vector<Offset> all;
    for (int j = 0; j < masks.regions(); ++j) {
        all.insert(all.end(), masks.offsets(j).begin(), masks.offsets(j).end());
    }
    return match_regions(img, {all}, params.effective_union_knn(), params.h, params.patch, known);
}

}  // namespace cartex
