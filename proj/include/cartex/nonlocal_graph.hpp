#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cartex/image.hpp"
#include "cartex/wavelet_frame.hpp"

namespace cartex {

struct Offset {
    int dx = 0;
    int dy = 0;
    friend bool operator==(const Offset&, const Offset&) = default;
};

/// Directional split of an S x S search window into a central region
/// (region 0) and D oriented bands (regions 1..D). Band j is centred on the
/// line through the window centre at angle (j-1) * 180 / D degrees; a pixel
/// whose perpendicular distance to several band lines is within the band
/// half-width, and not to all of them, goes to the band with the nearest
/// line (lowest index on ties). The window centre belongs to no region.
class PartitionMasks {
public:
    PartitionMasks(int window, int directions, int band_halfwidth);

    int window() const { return window_; }
    int directions() const { return directions_; }
    int band_halfwidth() const { return band_halfwidth_; }
    int regions() const { return directions_ + 1; }

    /// Region id of the offset, or -1 when uncovered (corners, centre).
    int region_of(int dx, int dy) const;
    bool contains(int region, int dx, int dy) const { return region_of(dx, dy) == region; }
    const std::vector<Offset>& offsets(int region) const { return offsets_[static_cast<std::size_t>(region)]; }

    /// Angle of band j (1-based) in radians.
    double band_angle(int j) const;

private:
    int window_, directions_, band_halfwidth_;
    std::vector<int> label_;  // window x window
    std::vector<std::vector<Offset>> offsets_;
};

PartitionMasks build_partition(int window, int directions, int band_halfwidth);

/// Mean squared difference between the patches centred at i and q, with
/// edge replication outside the image.
double patch_distance(const Image& img, int ix, int iy, int qx, int qy, int patch);

struct GraphParams {
    int window = 51;
    int directions = 4;
    int knn = 16;
    double h = 0.3;
    int patch = 7;
    int band_halfwidth = 2;
    /// Union-neighbourhood ("Baseline") graph: one region made of all
    /// partition offsets, keeping union_knn neighbours (0 means knn).
    bool isotropic = true;
    int union_knn = 0;

    int effective_union_knn() const { return union_knn > 0 ? union_knn : knn; }
};

struct Neighbor {
    std::int32_t index = 0;
    double distance = 0.0;
    double weight = 0.0;
};

/// Per pixel and region, up to K nearest patches (by distance, then index).
class PatchGraph {
public:
    PatchGraph(int width, int height, int regions, int knn);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixels() const { return static_cast<std::size_t>(width_) * height_; }
    int regions() const { return regions_; }
    int knn() const { return knn_; }

    /// Neighbours of pixel i in region j, sorted by (distance, index).
    std::span<const Neighbor> neighbors(std::size_t i, int region) const;
    /// Sum of stored weights for pixel i in region j.
    double weight_sum(std::size_t i, int region) const;

    void set_neighbors(std::size_t i, int region, std::span<const Neighbor> list);

private:
    std::size_t slot(std::size_t i, int region) const {
        return i * static_cast<std::size_t>(regions_) + static_cast<std::size_t>(region);
    }
    int width_, height_, regions_, knn_;
    std::vector<Neighbor> entries_;         // pixels * regions * knn
    std::vector<std::uint16_t> counts_;     // pixels * regions
    std::vector<double> sums_;              // pixels * regions
};

/// Top-K matching in every region of the partition with weights
/// exp(-d / h). Candidates are window pixels inside the image. With a mask,
/// only pixels with a known centre become candidates and distances are
/// averaged over the jointly known patch pixels.
PatchGraph build_patch_graph(const Image& img, const PartitionMasks& masks, int knn, double h,
                             int patch, const PixelMask* known = nullptr);

/// Uses params.isotropic to choose between the directional and the
/// union-neighbourhood graph.
PatchGraph build_patch_graph(const Image& img, const GraphParams& params,
                             const PixelMask* known = nullptr);

struct Triplet {
    std::int32_t row = 0;
    std::int32_t col = 0;
    double value = 0.0;
};

/// Spatial nonlocal Laplacian with unit diagonal; shared by every wavelet
/// channel. Each row combines the normalised per-region Laplacians with
/// equal weights over the regions that have neighbours.
class NonlocalLaplacian {
public:
    NonlocalLaplacian() = default;
    NonlocalLaplacian(int width, int height, std::vector<std::int64_t> row_ptr,
                      std::vector<std::int32_t> cols, std::vector<double> values,
                      std::vector<std::int32_t> isolated);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t rows() const { return static_cast<std::size_t>(width_) * height_; }
    std::size_t nonzeros() const { return values_.size() + rows(); }

    /// Rows with no neighbour in any region; these act as identity rows.
    const std::vector<std::int32_t>& isolated_rows() const { return isolated_; }

    void apply(std::span<const double> in, std::span<double> out) const;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const;

    CoefficientField apply(const CoefficientField& c) const;
    CoefficientField apply_adjoint(const CoefficientField& c) const;

    /// All stored entries including the unit diagonal, row-major.
    std::vector<Triplet> triplets() const;
    /// Dense row-major matrix; intended for small test instances.
    std::vector<double> to_dense() const;

    std::span<const std::int64_t> row_ptr() const { return row_ptr_; }
    std::span<const std::int32_t> cols() const { return cols_; }
    std::span<const double> values() const { return values_; }

private:
    void check(const CoefficientField& c) const;

    int width_ = 0, height_ = 0;
    // Off-diagonal entries in CSR form plus the transposed copy.
    std::vector<std::int64_t> row_ptr_;
    std::vector<std::int32_t> cols_;
    std::vector<double> values_;
    std::vector<std::int64_t> t_row_ptr_;
    std::vector<std::int32_t> t_cols_;
    std::vector<double> t_values_;
    std::vector<std::int32_t> isolated_;
};

NonlocalLaplacian build_laplacian(const PatchGraph& graph);

/// Text dump "row col value" per line, preceded by a header comment.
std::string format_triplets(const NonlocalLaplacian& laplacian);

}  // namespace cartex
