#include <doctest.h>

#include <cmath>
#include <limits>

#include "cartex/metrics.hpp"
#include "cartex/noise.hpp"
#include "cartex/solver.hpp"
#include "cartex/synthetic.hpp"
#include "dense_oracle.hpp"

using namespace cartex;

namespace {

DecompositionResult run(const Image& f, Mode mode, bool isotropic = true) {
    DecomposerOptions o;
    o.solver = SolverParams::defaults_for(mode);
    o.graph.isotropic = isotropic;
    return Decomposer(f, o).run();
}

double sup(const Image& a) {
    double m = 0.0;
    for (double v : a.pixels()) m = std::max(m, std::abs(v));
    return m;
}

double l2(const Image& a) { return norm2(a.pixels()); }

Image centred(const Image& f) {
    Image out = f;
    out -= f.mean();
    return out;
}

double tube_energy(const Image& v, int x0, int x1) {
    double s = 0.0;
    for (int y = 0; y < v.height(); ++y) {
        for (int x = x0; x <= x1; ++x) s += v(x, y) * v(x, y);
    }
    return std::sqrt(s);
}

AugmentedCoefficients filled(double value, std::size_t channels, int w, int h) {
    return {CoefficientField(channels, w, h, value), CoefficientField(channels, w, h, value)};
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("soft threshold") {
    AugmentedCoefficients y = filled(0.5, 1, 8, 8);
    y.j.at(0, 3) = -0.1;
    y.j.at(0, 4) = -0.9;
    const AugmentedCoefficients t = soft_threshold(y, filled(0.2, 1, 8, 8));
    CHECK(t.w.at(0, 0) == doctest::Approx(0.3));
    CHECK(t.j.at(0, 3) == 0.0);
    CHECK(t.j.at(0, 4) == doctest::Approx(-0.7));
    CHECK(soft_threshold(y, filled(0.0, 1, 8, 8)) == y);
}

TEST_CASE("update_lambda") {
    SolverParams p;
    p.beta1 = 0.3;
    p.beta2 = 0.4;
    p.eta1 = 2.0;
    p.eta2 = 3.0;
    Image phi(8, 8, 0.0);
    phi(1, 0) = 0.5;
    phi(2, 0) = 1.0;
    phi(3, 0) = 1e6;
    const AugmentedCoefficients l = update_lambda(phi, p, 9);
    for (std::size_t i = 0; i < phi.size(); ++i) CHECK(l.w.at(0, i) == 0.0);
    for (std::size_t k = 1; k < 9; ++k) {
        CHECK(l.w.at(k, 0) == doctest::Approx(0.3));
        CHECK(l.j.at(k, 0) == 0.0);
        CHECK(l.w.at(k, 1) == doctest::Approx(0.3 * std::exp(-1.0)));
        CHECK(l.j.at(k, 1) == doctest::Approx(0.4 * (1.0 - std::exp(-1.5))));
        CHECK(l.w.at(k, 3) == doctest::Approx(0.0));
        CHECK(l.j.at(k, 3) == doctest::Approx(0.4));
        CHECK(l.w.at(k, 1) >= l.w.at(k, 2));
        CHECK(l.j.at(k, 1) <= l.j.at(k, 2));
    }
    CHECK(l.j.at(0, 3) == doctest::Approx(0.4));
    for (double v : l.w.values()) CHECK(v >= 0.0);
    for (double v : l.j.values()) CHECK(v >= 0.0);
}

TEST_CASE("texturelessness") {
    const Image step = step_edge_image(64, 64);
    const AugmentedSystem s(build_spline_bank(), build_laplacian(build_patch_graph(step, GraphParams{})));
    const Image flat_phi = texturelessness(s, Image(64, 64, 0.4));
    CHECK(sup(flat_phi) <= 1e-28);
    const Image phi = texturelessness(s, step);
    double edge = 0.0, flat = 0.0;
    int ne = 0, nf = 0;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            CHECK(phi(x, y) >= 0.0);
            if (x == 31 || x == 32) {
                edge += phi(x, y);
                ++ne;
            } else if (std::abs(x - 32) > 4 && x > 4 && x < 59) {
                flat += phi(x, y);
                ++nf;
            }
        }
    }
    CHECK(edge / ne > 5.0 * flat / nf);

    // phi = sum over channels of squared L(Wu) at the site.
    const Image u = oracle::random_image(64, 64, 1);
    const CoefficientField lw = s.laplacian().apply(s.apply_W(u));
    const Image p = texturelessness(s, u);
    for (std::size_t i : {std::size_t{0}, std::size_t{777}, std::size_t{4095}}) {
        double e = 0.0;
        for (std::size_t k = 0; k < 9; ++k) e += lw.at(k, i) * lw.at(k, i);
        CHECK(p[i] == doctest::Approx(e).epsilon(1e-12));
    }
}

TEST_CASE("solver parameter validation") {
    CHECK_NOTHROW(SolverParams::noiseless_defaults().validate());
    CHECK_NOTHROW(SolverParams::noisy_defaults().validate());
    CHECK_NOTHROW(SolverParams::inpaint_defaults().validate());
    auto bad = [](auto edit) {
        SolverParams p;
        edit(p);
        return p;
    };
    CHECK_THROWS_AS(bad([](SolverParams& p) { p.gamma = 0.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverParams& p) { p.delta = 1.5; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverParams& p) { p.delta = 0.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverParams& p) { p.beta1 = -1.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverParams& p) { p.cg_tol = 0.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverParams& p) { p.lambda_refresh = 0; }).validate(), std::invalid_argument);
    CHECK(parse_mode(to_string(Mode::inpaint)) == Mode::inpaint);
    CHECK_THROWS_AS(parse_mode("bogus"), std::invalid_argument);
}

TEST_CASE("cg: zero right-hand side") {
    const LinearMap op = [](const StackedVector& x) { return x; };
    const CgResult r = cg_solve(op, StackedVector::zeros(8, 8), 1e-6, 10, StackedVector::zeros(8, 8));
    CHECK(r.iterations == 0);
    CHECK(r.x == StackedVector::zeros(8, 8));
    CHECK(r.converged);
}

TEST_CASE("cg: identity operator converges in one iteration") {
    const LinearMap op = [](const StackedVector& x) { return x; };
    const StackedVector rhs = oracle::random_stacked(10, 10, 2);
    const CgResult r = cg_solve(op, rhs, 1e-12, 10, StackedVector::zeros(10, 10));
    CHECK(r.iterations == 1);
    CHECK(oracle::max_abs_diff(oracle::flatten(r.x), oracle::flatten(rhs)) <= 1e-14);
}

TEST_CASE("cg agrees with a dense Cholesky solve") {
    const Image f = oracle::random_image(12, 12, 3);
    GraphParams gp;
    const PatchGraph g = build_patch_graph(f, gp);
    const AugmentedSystem s(build_spline_bank(), build_laplacian(g));
    const oracle::System d(12, 12, g);
    const StackedVector rhs = oracle::random_stacked(12, 12, 4);
    const double gamma = 0.1;
    const LinearMap op = [&](const StackedVector& x) { return s.normal_operator(x, gamma); };
    const CgResult r = cg_solve(op, rhs, 1e-8, 2000, StackedVector::zeros(12, 12));
    CHECK(r.converged);
    const std::vector<double> ref = oracle::cholesky_solve(d.normal(gamma), oracle::flatten(rhs));
    CHECK(oracle::max_abs_diff(oracle::flatten(r.x), ref) <= 1e-6);
}

TEST_CASE("cg: hitting the iteration limit is reported, not thrown") {
    const Image f = oracle::random_image(16, 16, 5);
    const AugmentedSystem s(build_spline_bank(), build_laplacian(build_patch_graph(f, GraphParams{})));
    const LinearMap op = [&](const StackedVector& x) { return s.normal_operator(x, 0.1); };
    const CgResult r = cg_solve(op, oracle::random_stacked(16, 16, 6), 1e-14, 2, StackedVector::zeros(16, 16));
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 2);

    DecomposerOptions o;
    o.solver.cg_maxit = 1;
    o.solver.iterations = 2;
    o.solver.outer_limit = 1;
    const DecompositionResult res = Decomposer(render_synthetic(preset_spec(0, 32)).mix, o).run();
    CHECK_FALSE(res.cg_all_converged);
    CHECK_FALSE(res.warnings.empty());
}

TEST_CASE("non-finite input aborts") {
    Image f(16, 16, 0.5);
    f(3, 3) = std::numeric_limits<double>::quiet_NaN();
    const AugmentedSystem s(build_spline_bank(), build_laplacian(build_patch_graph(Image(16, 16, 0.5), GraphParams{})));
    CHECK_THROWS_AS(solve_noisy(s, f, SolverParams::noisy_defaults()), NumericalError);
}

TEST_CASE("constant image is a fixed point") {
    const Image f(48, 48, 0.4);
    for (Mode m : {Mode::noiseless, Mode::noisy}) {
        const DecompositionResult r = run(f, m);
        CHECK(sup(r.texture) <= 1e-6);
        CHECK(sup(r.cartoon - f) <= 1e-6);
        CHECK(sup(r.residual) <= 1e-6);
    }
}

TEST_CASE("noiseless: piecewise-constant cartoon stays in u") {
    const Image f = step_edge_image(64, 64);
    const DecompositionResult r = run(f, Mode::noiseless);
    CHECK(l2(r.texture) / l2(f) <= 0.05);
    CHECK(sup(f - r.cartoon - r.texture) <= 1e-6);
    CHECK(r.constraint_met);
}

TEST_CASE("noiseless: periodic texture goes to v") {
    const Image f = bidirectional_sinusoid(64, 64, 6.0, 0.1);
    const DecompositionResult r = run(f, Mode::noiseless);
    const Image fc = centred(f);
    CHECK(l2(r.texture - fc) / l2(fc) <= 0.15);
    CHECK(sup(f - r.cartoon - r.texture) <= 1e-6);
}

TEST_CASE("noiseless: constraint holds on a synthetic mix") {
    const Image f = render_synthetic(preset_spec(2, 64)).mix;
    const DecompositionResult r = run(f, Mode::noiseless);
    CHECK(r.constraint_met);
    CHECK(sup(f - r.cartoon - r.texture) <= 1e-6);
    CHECK(r.passes >= 1);
    CHECK(r.diagnostics.back().pass == r.passes);
    CHECK(r.diagnostics.back().constraint_residual <= 1e-6);
}

TEST_CASE("a constant offset goes to the cartoon") {
    const Image step = step_edge_image(64, 64);
    const Image mix = render_synthetic(preset_spec(0, 64)).mix;
    for (Mode m : {Mode::noiseless, Mode::noisy}) {
        const Image& f = m == Mode::noiseless ? step : mix;
        Image shifted = f;
        shifted += 0.1;
        const DecompositionResult a = run(f, m);
        const DecompositionResult b = run(shifted, m);
        CHECK(sup(b.texture - a.texture) <= 1e-6);
    }
}

TEST_CASE("noisy: denoising improves the mix") {
    const SyntheticImages s = render_synthetic(preset_spec(0, 64));
    const Image f = add_gaussian_noise(s.mix, 0.1, 3);
    DecomposerOptions o;
    o.solver = SolverParams::noisy_defaults();
    const DecompositionResult r = Decomposer(f, o).run();
    CHECK(psnr(r.cartoon + r.texture, s.mix) >= psnr(f, s.mix) + 3.0);
    CHECK(ssim(r.cartoon + r.texture, s.mix) > ssim(f, s.mix));
    CHECK(sup(f - r.cartoon - r.texture - r.residual) <= 1e-12);

    const auto& d = r.diagnostics;
    REQUIRE(d.size() == 20);
    for (std::size_t k = d.size() - 5; k < d.size(); ++k) {
        CHECK(d[k].splitting_residual <= 1.1 * d[k - 1].splitting_residual);
    }
    for (std::size_t k = 0; k < d.size(); ++k) {
        CHECK(d[k].iteration == static_cast<int>(k) + 1);
        CHECK(d[k].lambda_updated == (static_cast<int>(k) < o.solver.lambda_refresh));
    }
}

TEST_CASE("inpaint with an all-known mask is the noisy solver") {
    const Image f = add_gaussian_noise(render_synthetic(preset_spec(1, 48)).mix, 0.05, 4);
    const AugmentedSystem s(build_spline_bank(), build_laplacian(build_patch_graph(f, GraphParams{})));
    SolverParams p = SolverParams::noisy_defaults();
    p.iterations = 6;
    const DecompositionResult a = solve_noisy(s, f, p);
    const DecompositionResult b = solve_inpaint(s, f, PixelMask(48, 48, true), p);
    CHECK(a.cartoon == b.cartoon);
    CHECK(a.texture == b.texture);
}

TEST_CASE("inpaint: holes are filled and known pixels kept") {
    const SyntheticImages s = render_synthetic(preset_spec(0, 64));
    const PixelMask mask = PixelMask::random(64, 64, 0.4, 5);
    const Image f = zero_fill(s.mix, mask);
    DecomposerOptions o;
    o.solver = SolverParams::inpaint_defaults();
    const DecompositionResult r = Decomposer(f, o, mask).run();
    const Image rec = r.cartoon + r.texture;
    CHECK(r.residual == rec);
    CHECK(psnr(rec, s.mix) >= psnr(f, s.mix) + 5.0);
    double known_res = 0.0, unknown_change = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (mask.known(i)) {
            known_res += std::abs(rec[i] - f[i]);
        } else {
            unknown_change += std::abs(rec[i] - f[i]);
        }
    }
    CHECK(known_res / mask.known_count() < unknown_change / (f.size() - mask.known_count()));
    CHECK_THROWS_AS(solve_inpaint(Decomposer(f, o, mask).system(), f, PixelMask(64, 64, false), o.solver),
                    std::invalid_argument);
}

TEST_CASE("baseline graph leaks more edge into v") {
    const Image f = step_edge_image(64, 64);
    const DecompositionResult iso = run(f, Mode::noiseless, true);
    const DecompositionResult base = run(f, Mode::noiseless, false);
    const double ti = tube_energy(iso.texture, 31, 33);
    const double tb = tube_energy(base.texture, 31, 33);
    CHECK(tb >= 1.5 * ti);
    CHECK(tb > 1e-3);
}

TEST_CASE("runs are bit-identical") {
    const Image f = render_synthetic(preset_spec(4, 48)).mix;
    const DecompositionResult a = run(f, Mode::noiseless);
    const DecompositionResult b = run(f, Mode::noiseless);
    CHECK(a.cartoon == b.cartoon);
    CHECK(a.texture == b.texture);
    CHECK(a.diagnostics.size() == b.diagnostics.size());
}

TEST_CASE("observer sees every record") {
    const Image f = render_synthetic(preset_spec(5, 32)).mix;
    DecomposerOptions o;
    int calls = 0;
    const DecompositionResult r = Decomposer(f, o).run([&](const IterationRecord&) { ++calls; });
    CHECK(calls == static_cast<int>(r.diagnostics.size()));
    CHECK(r.diagnostics.size() == static_cast<std::size_t>(o.solver.iterations + r.passes));
}

}  // TEST_SUITE
