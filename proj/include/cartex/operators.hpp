#pragma once

#include "cartex/image.hpp"
#include "cartex/nonlocal_graph.hpp"
#include "cartex/wavelet_frame.hpp"

namespace cartex {

/// x = [u; v].
struct StackedVector {
    Image u;
    Image v;

    StackedVector() = default;
    StackedVector(Image u_part, Image v_part);
    static StackedVector zeros(int width, int height);

    bool same_shape(const StackedVector& o) const { return u.same_shape(o.u) && v.same_shape(o.v); }
    bool all_finite() const { return u.all_finite() && v.all_finite(); }

    StackedVector& operator+=(const StackedVector& o);
    StackedVector& operator-=(const StackedVector& o);
    StackedVector& operator*=(double s);
    /// this += a * o
    void axpy(double a, const StackedVector& o);
    friend StackedVector operator+(StackedVector a, const StackedVector& b) { return a += b; }
    friend StackedVector operator-(StackedVector a, const StackedVector& b) { return a -= b; }
    friend bool operator==(const StackedVector&, const StackedVector&) = default;
};

double dot(const StackedVector& a, const StackedVector& b);
double norm2(const StackedVector& a);

/// Dx = [Wu; Jv].
struct AugmentedCoefficients {
    CoefficientField w;
    CoefficientField j;

    AugmentedCoefficients() = default;
    AugmentedCoefficients(CoefficientField w_part, CoefficientField j_part);
    static AugmentedCoefficients zeros(std::size_t channels, int width, int height);

    bool same_shape(const AugmentedCoefficients& o) const { return w.same_shape(o.w) && j.same_shape(o.j); }
    bool all_finite() const { return w.all_finite() && j.all_finite(); }

    AugmentedCoefficients& operator+=(const AugmentedCoefficients& o);
    AugmentedCoefficients& operator-=(const AugmentedCoefficients& o);
    AugmentedCoefficients& operator*=(double s);
    friend AugmentedCoefficients operator+(AugmentedCoefficients a, const AugmentedCoefficients& b) { return a += b; }
    friend AugmentedCoefficients operator-(AugmentedCoefficients a, const AugmentedCoefficients& b) { return a -= b; }
    friend bool operator==(const AugmentedCoefficients&, const AugmentedCoefficients&) = default;
};

double dot(const AugmentedCoefficients& a, const AugmentedCoefficients& b);
double norm2(const AugmentedCoefficients& a);

/// Matrix-free D = [W 0; 0 J] with J = L T, and A = [I I]. W and T share
/// one filter bank. An optional observation mask M turns the data term
/// into ||M(Ax - f)||^2.
class AugmentedSystem {
public:
    AugmentedSystem(FilterBank bank, NonlocalLaplacian laplacian);

    int width() const { return laplacian_.width(); }
    int height() const { return laplacian_.height(); }
    std::size_t channels() const { return bank_.channels(); }
    const FilterBank& bank() const { return bank_; }
    const NonlocalLaplacian& laplacian() const { return laplacian_; }

    CoefficientField apply_W(const Image& u) const;
    Image apply_W_adjoint(const CoefficientField& c) const;
    CoefficientField apply_J(const Image& v) const;
    Image apply_J_adjoint(const CoefficientField& c) const;

    AugmentedCoefficients apply_D(const StackedVector& x) const;
    StackedVector apply_D_adjoint(const AugmentedCoefficients& c) const;

    Image apply_A(const StackedVector& x) const;
    StackedVector apply_A_adjoint(const Image& r) const;

    /// A^T M A x + gamma D^T D x; M = I when mask is null.
    StackedVector normal_operator(const StackedVector& x, double gamma,
                                  const PixelMask* mask = nullptr) const;

private:
    void check(const Image& img) const;
    void check(const CoefficientField& c) const;

    FilterBank bank_;
    NonlocalLaplacian laplacian_;
};

}  // namespace cartex
