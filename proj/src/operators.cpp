#include "cartex/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace cartex {

StackedVector::StackedVector(Image u_part, Image v_part) : u(std::move(u_part)), v(std::move(v_part)) {
    if (!u.same_shape(v)) throw std::invalid_argument("stacked vector parts differ in shape");
}

StackedVector StackedVector::zeros(int width, int height) {
    return {Image(width, height, 0.0), Image(width, height, 0.0)};
}

StackedVector& StackedVector::operator+=(const StackedVector& o) {
    u += o.u;
    v += o.v;
    return *this;
}

StackedVector& StackedVector::operator-=(const StackedVector& o) {
    u -= o.u;
    v -= o.v;
    return *this;
}

StackedVector& StackedVector::operator*=(double s) {
    u *= s;
    v *= s;
    return *this;
}

void StackedVector::axpy(double a, const StackedVector& o) {
    if (!same_shape(o)) throw std::invalid_argument("stacked vector shape mismatch");
    auto pu = u.pixels();
    auto pv = v.pixels();
    const auto qu = o.u.pixels();
    const auto qv = o.v.pixels();
    for (std::size_t i = 0; i < pu.size(); ++i) {
        pu[i] += a * qu[i];
        pv[i] += a * qv[i];
    }
}

double dot(const StackedVector& a, const StackedVector& b) {
    return dot(a.u.pixels(), b.u.pixels()) + dot(a.v.pixels(), b.v.pixels());
}

double norm2(const StackedVector& a) { return std::sqrt(dot(a, a)); }

AugmentedCoefficients::AugmentedCoefficients(CoefficientField w_part, CoefficientField j_part)
    : w(std::move(w_part)), j(std::move(j_part)) {
    if (!w.same_shape(j)) throw std::invalid_argument("augmented coefficient parts differ in shape");
}

AugmentedCoefficients AugmentedCoefficients::zeros(std::size_t channels, int width, int height) {
    return {CoefficientField(channels, width, height), CoefficientField(channels, width, height)};
}

AugmentedCoefficients& AugmentedCoefficients::operator+=(const AugmentedCoefficients& o) {
    w += o.w;
    j += o.j;
    return *this;
}

AugmentedCoefficients& AugmentedCoefficients::operator-=(const AugmentedCoefficients& o) {
    w -= o.w;
    j -= o.j;
    return *this;
}

AugmentedCoefficients& AugmentedCoefficients::operator*=(double s) {
    w *= s;
    j *= s;
    return *this;
}

double dot(const AugmentedCoefficients& a, const AugmentedCoefficients& b) {
    return dot(a.w.values(), b.w.values()) + dot(a.j.values(), b.j.values());
}

double norm2(const AugmentedCoefficients& a) { return std::sqrt(dot(a, a)); }

AugmentedSystem::AugmentedSystem(FilterBank bank, NonlocalLaplacian laplacian)
    : bank_(std::move(bank)), laplacian_(std::move(laplacian)) {}

void AugmentedSystem::check(const Image& img) const {
    if (img.width() != width() || img.height() != height()) {
        throw std::invalid_argument("image does not match operator grid");
    }
}

void AugmentedSystem::check(const CoefficientField& c) const {
    if (c.width() != width() || c.height() != height() || c.channels() != channels()) {
        throw std::invalid_argument("coefficient field does not match operator grid");
    }
}

CoefficientField AugmentedSystem::apply_W(const Image& u) const {
    check(u);
    return analyze(u, bank_);
}

Image AugmentedSystem::apply_W_adjoint(const CoefficientField& c) const {
    check(c);
    return synthesize(c, bank_);
}

CoefficientField AugmentedSystem::apply_J(const Image& v) const {
    check(v);
    return laplacian_.apply(analyze(v, bank_));
}

Image AugmentedSystem::apply_J_adjoint(const CoefficientField& c) const {
    check(c);
    return synthesize(laplacian_.apply_adjoint(c), bank_);
}

AugmentedCoefficients AugmentedSystem::apply_D(const StackedVector& x) const {
    return {apply_W(x.u), apply_J(x.v)};
}

StackedVector AugmentedSystem::apply_D_adjoint(const AugmentedCoefficients& c) const {
    return {apply_W_adjoint(c.w), apply_J_adjoint(c.j)};
}

Image AugmentedSystem::apply_A(const StackedVector& x) const {
    check(x.u);
    check(x.v);
    return x.u + x.v;
}

StackedVector AugmentedSystem::apply_A_adjoint(const Image& r) const {
    check(r);
    return {r, r};
}

StackedVector AugmentedSystem::normal_operator(const StackedVector& x, double gamma,
                                               const PixelMask* mask) const {
    Image r = apply_A(x);
    if (mask) {
        if (!mask->matches(r)) throw std::invalid_argument("mask does not match operator grid");
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!mask->known(i)) r[i] = 0.0;
        }
    }
    StackedVector out = apply_A_adjoint(r);
    if (gamma != 0.0) {
        out.axpy(gamma, apply_D_adjoint(apply_D(x)));
    }
    return out;
}

}  // namespace cartex
