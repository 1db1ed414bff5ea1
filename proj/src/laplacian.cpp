#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cartex/nonlocal_graph.hpp"

namespace cartex {

NonlocalLaplacian::NonlocalLaplacian(int width, int height, std::vector<std::int64_t> row_ptr,
                                     std::vector<std::int32_t> cols, std::vector<double> values,
                                     std::vector<std::int32_t> isolated)
    : width_(width), height_(height), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)),
      values_(std::move(values)), isolated_(std::move(isolated)) {
    const std::size_t n = rows();
    if (row_ptr_.size() != n + 1 || cols_.size() != values_.size() ||
        static_cast<std::size_t>(row_ptr_.back()) != cols_.size()) {
        throw std::invalid_argument("malformed CSR structure");
    }
    // Transposed copy for the adjoint.
    t_row_ptr_.assign(n + 1, 0);
    for (std::int32_t c : cols_) {
        if (c < 0 || static_cast<std::size_t>(c) >= n) throw std::invalid_argument("CSR column out of range");
        ++t_row_ptr_[static_cast<std::size_t>(c) + 1];
    }
    std::partial_sum(t_row_ptr_.begin(), t_row_ptr_.end(), t_row_ptr_.begin());
    t_cols_.resize(cols_.size());
    t_values_.resize(values_.size());
    std::vector<std::int64_t> fill(t_row_ptr_.begin(), t_row_ptr_.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::int64_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
            const auto c = static_cast<std::size_t>(cols_[static_cast<std::size_t>(e)]);
            const auto slot = static_cast<std::size_t>(fill[c]++);
            t_cols_[slot] = static_cast<std::int32_t>(i);
            t_values_[slot] = values_[static_cast<std::size_t>(e)];
        }
    }
}

namespace {

void csr_unit_apply(const std::vector<std::int64_t>& ptr, const std::vector<std::int32_t>& cols,
                    const std::vector<double>& vals, std::span<const double> in, std::span<double> out) {
    const std::size_t n = ptr.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        double s = in[i];
        for (std::int64_t e = ptr[i]; e < ptr[i + 1]; ++e) {
            s += vals[static_cast<std::size_t>(e)] * in[static_cast<std::size_t>(cols[static_cast<std::size_t>(e)])];
        }
        out[i] = s;
    }
}

// M > 0 fixes the channel count at compile time so the inner loop unrolls.
template <std::size_t M>
void gather_rows(const std::vector<std::int64_t>& ptr, const std::vector<std::int32_t>& cols,
                 const std::vector<double>& vals, const double* packed, double* dst, std::size_t n,
                 std::size_t channels) {
    const std::size_t m = M > 0 ? M : channels;
    std::vector<double> acc(m);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(packed + i * m, m, acc.data());
        for (std::int64_t e = ptr[i]; e < ptr[i + 1]; ++e) {
            const double v = vals[static_cast<std::size_t>(e)];
            const double* q = packed + static_cast<std::size_t>(cols[static_cast<std::size_t>(e)]) * m;
            for (std::size_t k = 0; k < m; ++k) acc[k] += v * q[k];
        }
        for (std::size_t k = 0; k < m; ++k) dst[k * n + i] = acc[k];
    }
}

// Same product on every plane. The planes are interleaved first so that each
// neighbour gather reads one contiguous run of m values.
void csr_unit_apply_planes(const std::vector<std::int64_t>& ptr, const std::vector<std::int32_t>& cols,
                           const std::vector<double>& vals, const CoefficientField& in,
                           CoefficientField& out) {
    const std::size_t n = ptr.size() - 1;
    const std::size_t m = in.channels();
    const double* src = in.values().data();
    double* dst = out.values().data();
    std::vector<double> packed(n * m);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < n; ++i) packed[i * m + k] = src[k * n + i];
    }
    if (m == 9) {
        gather_rows<9>(ptr, cols, vals, packed.data(), dst, n, m);
    } else {
        gather_rows<0>(ptr, cols, vals, packed.data(), dst, n, m);
    }
}

}  // namespace

void NonlocalLaplacian::apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != rows() || out.size() != rows()) throw std::invalid_argument("Laplacian size mismatch");
    csr_unit_apply(row_ptr_, cols_, values_, in, out);
}

void NonlocalLaplacian::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    if (in.size() != rows() || out.size() != rows()) throw std::invalid_argument("Laplacian size mismatch");
    csr_unit_apply(t_row_ptr_, t_cols_, t_values_, in, out);
}

void NonlocalLaplacian::check(const CoefficientField& c) const {
    if (c.width() != width_ || c.height() != height_) {
        throw std::invalid_argument("coefficient field does not match Laplacian grid");
    }
}

CoefficientField NonlocalLaplacian::apply(const CoefficientField& c) const {
    check(c);
    CoefficientField out(c.channels(), c.width(), c.height());
    csr_unit_apply_planes(row_ptr_, cols_, values_, c, out);
    return out;
}

CoefficientField NonlocalLaplacian::apply_adjoint(const CoefficientField& c) const {
    check(c);
    CoefficientField out(c.channels(), c.width(), c.height());
    csr_unit_apply_planes(t_row_ptr_, t_cols_, t_values_, c, out);
    return out;
}

std::vector<Triplet> NonlocalLaplacian::triplets() const {
    std::vector<Triplet> out;
    out.reserve(nonzeros());
    for (std::size_t i = 0; i < rows(); ++i) {
        const auto row = static_cast<std::int32_t>(i);
        bool diag_done = false;
        for (std::int64_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
            const auto c = cols_[static_cast<std::size_t>(e)];
            if (!diag_done && c > row) {
                out.push_back({row, row, 1.0});
                diag_done = true;
            }
            out.push_back({row, c, values_[static_cast<std::size_t>(e)]});
        }
        if (!diag_done) out.push_back({row, row, 1.0});
    }
    return out;
}

std::vector<double> NonlocalLaplacian::to_dense() const {
    const std::size_t n = rows();
    std::vector<double> dense(n * n, 0.0);
    for (const auto& t : triplets()) {
        dense[static_cast<std::size_t>(t.row) * n + static_cast<std::size_t>(t.col)] += t.value;
    }
    return dense;
}

NonlocalLaplacian build_laplacian(const PatchGraph& graph) {
    const std::size_t n = graph.pixels();
    std::vector<std::int64_t> row_ptr(n + 1, 0);
    std::vector<std::int32_t> cols;
    std::vector<double> values;
    std::vector<std::int32_t> isolated;
    std::vector<std::pair<std::int32_t, double>> row;
    for (std::size_t i = 0; i < n; ++i) {
        int nonempty = 0;
        for (int j = 0; j < graph.regions(); ++j) {
            if (!graph.neighbors(i, j).empty() && graph.weight_sum(i, j) > 0.0) ++nonempty;
        }
        row.clear();
        if (nonempty == 0) {
            isolated.push_back(static_cast<std::int32_t>(i));
        } else {
            for (int j = 0; j < graph.regions(); ++j) {
                const auto nbrs = graph.neighbors(i, j);
                const double total = graph.weight_sum(i, j);
                if (nbrs.empty() || !(total > 0.0)) continue;
                for (const auto& nb : nbrs) row.emplace_back(nb.index, -nb.weight / total / nonempty);
            }
            std::sort(row.begin(), row.end());
            // Regions are disjoint, but merge defensively if a graph repeats a column.
            std::size_t out = 0;
            for (std::size_t t = 0; t < row.size(); ++t) {
                if (out > 0 && row[out - 1].first == row[t].first) {
                    row[out - 1].second += row[t].second;
                } else {
                    row[out++] = row[t];
                }
            }
            row.resize(out);
        }
        for (const auto& [c, v] : row) {
            cols.push_back(c);
            values.push_back(v);
        }
        row_ptr[i + 1] = static_cast<std::int64_t>(cols.size());
    }
    return NonlocalLaplacian(graph.width(), graph.height(), std::move(row_ptr), std::move(cols),
                             std::move(values), std::move(isolated));
}

std::string format_triplets(const NonlocalLaplacian& laplacian) {
    std::ostringstream out;
    out << "# nonlocal laplacian " << laplacian.width() << 'x' << laplacian.height() << ", "
        << laplacian.nonzeros() << " entries, " << laplacian.isolated_rows().size()
        << " isolated rows\n";
    char buf[64];
    for (const auto& t : laplacian.triplets()) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", t.row, t.col, t.value);
        out << buf;
    }
    return out.str();
}

}  // namespace cartex
