#include <doctest.h>

#include "cartex/operators.hpp"
#include "cartex/synthetic.hpp"
#include "dense_oracle.hpp"

using namespace cartex;

namespace {

struct Fixture {
    int w, h;
    Image f;
    PatchGraph graph;
    AugmentedSystem system;

    Fixture(int width, int height, std::uint64_t seed, int window = 51)
        : w(width),
          h(height),
          f(oracle::random_image(width, height, seed)),
          graph(build_patch_graph(f, params(window))),
          system(build_spline_bank(), build_laplacian(graph)) {}

    static GraphParams params(int window) {
        GraphParams gp;
        gp.window = window;
        return gp;
    }
};

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("block definitions of A and D") {
    const Fixture fx(16, 16, 1, 15);
    const Image u = oracle::random_image(16, 16, 2);
    const Image zero(16, 16, 0.0);
    CHECK(fx.system.apply_A(StackedVector(u, zero)) == u);
    const StackedVector at = fx.system.apply_A_adjoint(u);
    CHECK(at.u == u);
    CHECK(at.v == u);
    const AugmentedCoefficients d = fx.system.apply_D(StackedVector(u, zero));
    CHECK(d.w == analyze(u, build_spline_bank()));
    CHECK(oracle::max_abs(oracle::flatten(d.j)) == 0.0);
}

TEST_CASE("J of a constant image is zero") {
    const Fixture fx(20, 20, 3, 15);
    CHECK(oracle::max_abs(oracle::flatten(fx.system.apply_J(Image(20, 20, 0.6)))) <= 1e-14);
}

TEST_CASE("operators are linear") {
    const Fixture fx(18, 18, 4, 15);
    const Image a = oracle::random_image(18, 18, 5), b = oracle::random_image(18, 18, 6);
    const CoefficientField lhs = fx.system.apply_J(a * 0.3 + b * -2.0);
    const CoefficientField rhs = fx.system.apply_J(a) * 0.3 + fx.system.apply_J(b) * -2.0;
    CHECK(oracle::max_abs_diff(oracle::flatten(lhs), oracle::flatten(rhs)) <= 1e-12);
}

TEST_CASE("randomized adjoint identities") {
    const Fixture fx(32, 28, 7);
    const auto& s = fx.system;
    for (std::uint64_t t = 0; t < 4; ++t) {
        const Image v = oracle::random_image(32, 28, 10 + t);
        const CoefficientField c = oracle::random_field(9, 32, 28, 20 + t);
        CHECK(oracle::relative_gap(dot(s.apply_W(v).values(), c.values()), dot(v.pixels(), s.apply_W_adjoint(c).pixels())) <=
              1e-10);
        CHECK(oracle::relative_gap(dot(s.apply_J(v).values(), c.values()), dot(v.pixels(), s.apply_J_adjoint(c).pixels())) <=
              1e-10);

        const StackedVector x = oracle::random_stacked(32, 28, 30 + t);
        const AugmentedCoefficients y = oracle::random_augmented(9, 32, 28, 40 + t);
        CHECK(oracle::relative_gap(dot(s.apply_D(x), y), dot(x, s.apply_D_adjoint(y))) <= 1e-10);
        CHECK(oracle::relative_gap(dot(s.apply_A(x).pixels(), v.pixels()), dot(x, s.apply_A_adjoint(v))) <= 1e-10);

        const StackedVector z = oracle::random_stacked(32, 28, 50 + t);
        CHECK(oracle::relative_gap(dot(s.normal_operator(x, 0.7), z), dot(x, s.normal_operator(z, 0.7))) <= 1e-10);
        CHECK(dot(s.normal_operator(x, 0.7), x) >= -1e-10);

        const PixelMask m = PixelMask::random(32, 28, 0.4, 60 + t);
        CHECK(oracle::relative_gap(dot(s.normal_operator(x, 0.7, &m), z), dot(x, s.normal_operator(z, 0.7, &m))) <= 1e-10);
    }
}

TEST_CASE("adjoints vanish on zero input") {
    const Fixture fx(12, 12, 8, 11);
    CHECK(fx.system.apply_J_adjoint(CoefficientField(9, 12, 12)) == Image(12, 12, 0.0));
    const StackedVector z = fx.system.apply_D_adjoint(AugmentedCoefficients::zeros(9, 12, 12));
    CHECK(z == StackedVector::zeros(12, 12));
}

TEST_CASE("gamma = 0 normal operator is A^T A") {
    const Fixture fx(16, 16, 9, 15);
    const StackedVector x = oracle::random_stacked(16, 16, 10);
    const StackedVector n = fx.system.normal_operator(x, 0.0);
    const Image sum = x.u + x.v;
    CHECK(oracle::max_abs_diff(oracle::flatten(n.u), oracle::flatten(sum)) <= 1e-15);
    CHECK(oracle::max_abs_diff(oracle::flatten(n.v), oracle::flatten(sum)) <= 1e-15);
}

TEST_CASE("all operators equal dense matrices on a 12x12 instance") {
    const Fixture fx(12, 12, 11);
    const oracle::System d(12, 12, fx.graph);
    const auto& s = fx.system;
    const Image v = oracle::random_image(12, 12, 12);
    const CoefficientField c = oracle::random_field(9, 12, 12, 13);
    const StackedVector x = oracle::random_stacked(12, 12, 14);
    const AugmentedCoefficients y = oracle::random_augmented(9, 12, 12, 15);
    const double tol = 1e-12;

    CHECK(oracle::max_abs_diff(oracle::flatten(s.apply_W(v)), d.W.apply(oracle::flatten(v))) <= tol);
    CHECK(oracle::max_abs_diff(oracle::flatten(s.apply_W_adjoint(c)), d.W.transpose().apply(oracle::flatten(c))) <= tol);
    CHECK(oracle::max_abs_diff(oracle::flatten(s.apply_J(v)), d.J.apply(oracle::flatten(v))) <= tol);
    CHECK(oracle::max_abs_diff(oracle::flatten(s.apply_J_adjoint(c)), d.J.transpose().apply(oracle::flatten(c))) <= tol);
    CHECK(oracle::max_abs_diff(oracle::flatten(s.apply_D(x)), d.D.apply(oracle::flatten(x))) <= tol);
    CHECK(oracle::max_abs_diff(oracle::flatten(s.apply_D_adjoint(y)), d.D.transpose().apply(oracle::flatten(y))) <= tol);
    CHECK(oracle::max_abs_diff(oracle::flatten(s.apply_A(x)), d.A.apply(oracle::flatten(x))) <= tol);
    CHECK(oracle::max_abs_diff(oracle::flatten(s.apply_A_adjoint(v)), d.At.apply(oracle::flatten(v))) <= tol);
    CHECK(oracle::max_abs_diff(oracle::flatten(s.normal_operator(x, 0.3)), d.normal(0.3).apply(oracle::flatten(x))) <=
          tol);

    const PixelMask m = PixelMask::random(12, 12, 0.4, 16);
    std::vector<bool> known(144);
    for (std::size_t i = 0; i < 144; ++i) known[i] = m.known(i);
    CHECK(oracle::max_abs_diff(oracle::flatten(s.normal_operator(x, 0.3, &m)),
                               d.normal(0.3, known).apply(oracle::flatten(x))) <= tol);
}

TEST_CASE("exact recurrence is annihilated by J away from the border") {
    Image img(32, 32);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) img(x, y) = x % 2 ? 0.55 : 0.45;
    }
    GraphParams gp;
    gp.knn = 4;
    const AugmentedSystem s(build_spline_bank(), build_laplacian(build_patch_graph(img, gp)));
    const CoefficientField j = s.apply_J(img);
    for (std::size_t k = 0; k < 9; ++k) {
        for (int y = 3; y < 29; ++y) {
            for (int x = 3; x < 29; ++x) CHECK(std::abs(j.at(k, img.index(x, y))) <= 1e-8);
        }
    }
}

TEST_CASE("shape mismatches throw") {
    const Fixture fx(12, 12, 17, 11);
    CHECK_THROWS_AS(fx.system.apply_W(Image(12, 13)), std::invalid_argument);
    CHECK_THROWS_AS(fx.system.apply_J_adjoint(CoefficientField(9, 13, 12)), std::invalid_argument);
}

}  // TEST_SUITE
