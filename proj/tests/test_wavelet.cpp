#include <doctest.h>

#include <cmath>

#include "cartex/wavelet_frame.hpp"
#include "dense_oracle.hpp"

using namespace cartex;

TEST_SUITE("wavelet") {

TEST_CASE("spline bank kernels") {
    const FilterBank bank = build_spline_bank();
    REQUIRE(bank.channels() == 9);
    const int low[3][3] = {{1, 2, 1}, {2, 4, 2}, {1, 2, 1}};
    const int diag[3][3] = {{1, 0, -1}, {0, 0, 0}, {-1, 0, 1}};
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            CHECK(bank.filter(0).tap(dx, dy) == doctest::Approx(low[dy + 1][dx + 1] / 16.0).epsilon(1e-15));
            CHECK(bank.filter(4).tap(dx, dy) == doctest::Approx(2.0 * diag[dy + 1][dx + 1] / 16.0).epsilon(1e-15));
        }
    }
    CHECK(bank.filter(0).sum() == doctest::Approx(1.0));
    for (std::size_t k = 1; k < 9; ++k) CHECK(std::abs(bank.filter(k).sum()) <= 1e-15);
}

TEST_CASE("channel 3i + j is vertical a_i times horizontal a_j") {
    const FilterBank bank = build_spline_bank();
    const auto f = oracle::spline_filters();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const Kernel2D& k = bank.filter(static_cast<std::size_t>(3 * i + j));
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    CHECK(k.tap(dx, dy) == doctest::Approx(f[i][dy + 1] * f[j][dx + 1]).epsilon(1e-15));
                }
            }
        }
    }
}

TEST_CASE("constant image: low-pass keeps the constant, high-pass is zero") {
    const FilterBank bank = build_spline_bank();
    const CoefficientField c = analyze(Image(16, 12, 0.37), bank);
    for (std::size_t i = 0; i < c.plane_size(); ++i) CHECK(c.at(0, i) == doctest::Approx(0.37).epsilon(1e-15));
    for (std::size_t k = 1; k < 9; ++k) {
        for (double v : c.plane(k)) CHECK(std::abs(v) <= 1e-16);
    }
}

TEST_CASE("impulse response is the reversed, wrapped filter") {
    const FilterBank bank = build_spline_bank();
    Image delta(10, 9, 0.0);
    delta(0, 0) = 1.0;
    const CoefficientField c = analyze(delta, bank);
    for (std::size_t k = 0; k < 9; ++k) {
        for (int y = 0; y < 9; ++y) {
            for (int x = 0; x < 10; ++x) {
                // c(x, y) = a(-x, -y) with periodic wrap
                const int dx = x == 0 ? 0 : (x == 1 ? -1 : (x == 9 ? 1 : 99));
                const int dy = y == 0 ? 0 : (y == 1 ? -1 : (y == 8 ? 1 : 99));
                const double expected = (dx == 99 || dy == 99) ? 0.0 : bank.filter(k).tap(dx, dy);
                CHECK(c.at(k, delta.index(x, y)) == expected);
            }
        }
    }
}

TEST_CASE("tight frame: synthesize(analyze(x)) = x") {
    const FilterBank bank = build_spline_bank();
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Image x = oracle::random_image(64, 64, 100 + s);
        const Image y = synthesize(analyze(x, bank), bank);
        CHECK(oracle::max_abs_diff(oracle::flatten(x), oracle::flatten(y)) <= 1e-10);
    }
    const Image odd = oracle::random_image(9, 13, 3);
    CHECK(oracle::max_abs_diff(oracle::flatten(odd), oracle::flatten(synthesize(analyze(odd, bank), bank))) <= 1e-10);
}

TEST_CASE("synthesize is the adjoint of analyze") {
    const FilterBank bank = build_spline_bank();
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Image x = oracle::random_image(33, 20, 200 + s);
        const CoefficientField y = oracle::random_field(9, 33, 20, 300 + s);
        const double lhs = dot(analyze(x, bank).values(), y.values());
        const double rhs = dot(x.pixels(), synthesize(y, bank).pixels());
        CHECK(oracle::relative_gap(lhs, rhs) <= 1e-10);
    }
    const Image zero = synthesize(CoefficientField(9, 12, 12), bank);
    CHECK(zero == Image(12, 12, 0.0));
}

TEST_CASE("analysis matches the dense matrix") {
    const FilterBank bank = build_spline_bank();
    const oracle::Dense w = oracle::analysis_matrix(11, 9);
    const Image x = oracle::random_image(11, 9, 4);
    CHECK(oracle::max_abs_diff(oracle::flatten(analyze(x, bank)), w.apply(oracle::flatten(x))) <= 1e-12);
    const CoefficientField c = oracle::random_field(9, 11, 9, 5);
    CHECK(oracle::max_abs_diff(oracle::flatten(synthesize(c, bank)), w.transpose().apply(oracle::flatten(c))) <=
          1e-12);
}

TEST_CASE("analysis is linear") {
    const FilterBank bank = build_spline_bank();
    const Image x = oracle::random_image(24, 24, 6);
    const Image y = oracle::random_image(24, 24, 7);
    const double a = 0.7, b = -1.3;
    const CoefficientField lhs = analyze(x * a + y * b, bank);
    const CoefficientField rhs = analyze(x, bank) * a + analyze(y, bank) * b;
    CHECK(oracle::max_abs_diff(oracle::flatten(lhs), oracle::flatten(rhs)) <= 1e-12);
}

TEST_CASE("shape errors") {
    const FilterBank bank = build_spline_bank();
    CHECK_THROWS_AS(synthesize(CoefficientField(4, 12, 12), bank), std::invalid_argument);
    CHECK_THROWS_AS(Kernel2D::tensor({1, 2}, {1, 2}), std::invalid_argument);
}

}  // TEST_SUITE
