#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cartex/image.hpp"
#include "cartex/image_io.hpp"
#include "cartex/keyvalue.hpp"
#include "cartex/metrics.hpp"
#include "cartex/noise.hpp"
#include "cartex/synthetic.hpp"
#include "dense_oracle.hpp"

using namespace cartex;

namespace {

double variance(const Image& img) {
    const double m = img.mean();
    double s = 0.0;
    for (double v : img.pixels()) s += (v - m) * (v - m);
    return s / static_cast<double>(img.size());
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("cartex_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("image") {

TEST_CASE("images smaller than 8x8 are rejected") {
    CHECK_THROWS_AS(Image(7, 8), std::invalid_argument);
    CHECK_THROWS_AS(Image(8, 7), std::invalid_argument);
    CHECK_NOTHROW(Image(8, 8));
    CHECK_THROWS_AS(Image(8, 8, std::vector<double>(63)), std::invalid_argument);
}

TEST_CASE("psnr examples") {
    const Image a = oracle::random_image(32, 32, 1);
    CHECK(psnr(a, a) == doctest::Approx(kPsnrCap));
    Image b = a;
    b += 0.1;
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));
    Image c = a;
    c += 0.01;
    CHECK(psnr(a, c) == doctest::Approx(40.0).epsilon(1e-9));
    CHECK(psnr(a, b, 255.0) == doctest::Approx(20.0 + 20.0 * std::log10(255.0)).epsilon(1e-9));
}

TEST_CASE("psnr and ssim are symmetric") {
    const Image a = oracle::random_image(24, 24, 2);
    const Image b = oracle::random_image(24, 24, 3);
    CHECK(psnr(a, b) == psnr(b, a));
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-14));
}

TEST_CASE("metrics reject dimension mismatch") {
    CHECK_THROWS_AS(psnr(Image(16, 16), Image(16, 17)), std::invalid_argument);
    CHECK_THROWS_AS(ssim(Image(16, 16), Image(17, 16)), std::invalid_argument);
    CHECK_THROWS_AS(ssim(Image(10, 16), Image(10, 16)), std::invalid_argument);
}

TEST_CASE("ssim examples") {
    const Image a = oracle::random_image(32, 32, 4);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    Image inv(32, 32, 1.0);
    inv -= a;
    CHECK(ssim(a, inv) < 1.0);
    CHECK(ssim(a, inv) < 0.0);
    CHECK(ssim(Image(16, 16, 0.3), Image(16, 16, 0.3)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim matches a direct single-window evaluation") {
    // An 11x11 image holds exactly one window, so the mean is that window's value.
    const Image a = oracle::random_image(11, 11, 5);
    const Image b = oracle::random_image(11, 11, 6);
    std::vector<double> g(121);
    double gs = 0.0;
    for (int y = 0; y < 11; ++y) {
        for (int x = 0; x < 11; ++x) {
            const double r2 = (x - 5) * (x - 5) + (y - 5) * (y - 5);
            g[y * 11 + x] = std::exp(-r2 / (2.0 * 1.5 * 1.5));
            gs += g[y * 11 + x];
        }
    }
    double ma = 0, mb = 0;
    for (int i = 0; i < 121; ++i) {
        ma += g[i] / gs * a[i];
        mb += g[i] / gs * b[i];
    }
    double va = 0, vb = 0, cov = 0;
    for (int i = 0; i < 121; ++i) {
        va += g[i] / gs * (a[i] - ma) * (a[i] - ma);
        vb += g[i] / gs * (b[i] - mb) * (b[i] - mb);
        cov += g[i] / gs * (a[i] - ma) * (b[i] - mb);
    }
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const double expected = (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("gaussian noise") {
    const Image base = oracle::random_image(256, 256, 7);
    CHECK(add_gaussian_noise(base, 0.0, 3) == base);
    const Image noisy = add_gaussian_noise(base, 0.1, 3);
    const Image n = noisy - base;
    CHECK(std::abs(variance(n) - 0.01) <= 0.05 * 0.01);
    CHECK(std::abs(noisy.mean() - base.mean()) <= 3.0 * 0.1 / std::sqrt(static_cast<double>(base.size())));
    CHECK(add_gaussian_noise(base, 0.1, 3) == noisy);
    CHECK_FALSE(add_gaussian_noise(base, 0.1, 4) == noisy);
    CHECK_THROWS_AS(add_gaussian_noise(base, -0.1, 3), std::invalid_argument);
}

TEST_CASE("noise is not clamped") {
    const Image base(64, 64, 0.98);
    const Image noisy = add_gaussian_noise(base, 0.1, 11);
    CHECK(noisy.max() > 1.0);
}

TEST_CASE("pre_denoise") {
    const Image flat(32, 32, 0.4);
    const Image out = pre_denoise(flat, 1e-4);
    CHECK(oracle::max_abs_diff(oracle::flatten(out), oracle::flatten(flat)) <= 1e-6);

    const Image noisy = add_gaussian_noise(Image(48, 48, 0.5), 0.1, 21);
    const Image smooth = pre_denoise(noisy, 0.1);
    CHECK(variance(smooth) < variance(noisy));
    CHECK(pre_denoise(noisy, 0.1) == smooth);
    CHECK_THROWS_AS(pre_denoise(noisy, 0.0), std::invalid_argument);
}

TEST_CASE("render_synthetic: empty spec is the background") {
    SyntheticSpec spec;
    spec.width = 32;
    spec.height = 24;
    spec.background = 0.3;
    const auto r = render_synthetic(spec);
    CHECK(r.cartoon == Image(32, 24, 0.3));
    CHECK(r.texture == Image(32, 24, 0.0));
    CHECK(r.mix == r.cartoon);
}

TEST_CASE("render_synthetic: one disk, no texture") {
    SyntheticSpec spec;
    spec.width = spec.height = 40;
    spec.cartoon.push_back(DiskShape{{20, 20}, 8, 0.9});
    const auto r = render_synthetic(spec);
    CHECK(r.mix == r.cartoon);
    CHECK(r.cartoon(20, 20) == 0.9);
    CHECK(r.cartoon(2, 2) == 0.5);
}

TEST_CASE("render_synthetic: sinusoid amplitude bound") {
    SyntheticSpec spec;
    spec.width = spec.height = 48;
    spec.seed = 5;
    spec.texture.push_back(SinusoidPatch{0.15, 0.7, 0.08, FullSupport{}});
    const auto r = render_synthetic(spec);
    CHECK(std::max(std::abs(r.texture.min()), std::abs(r.texture.max())) <= 0.08);
    CHECK(r.texture.max() > 0.06);
}

TEST_CASE("render_synthetic: mix is the clamped sum on every preset") {
    for (int i = 0; i < 8; ++i) {
        const auto r = render_synthetic(preset_spec(i, 64));
        CHECK(r.mix == clamp01(r.cartoon + r.texture));
    }
}

TEST_CASE("render_synthetic: primitives outside the canvas are rejected") {
    SyntheticSpec spec;
    spec.width = spec.height = 32;
    spec.cartoon.push_back(DiskShape{{30, 16}, 8, 0.9});
    CHECK_THROWS_AS(render_synthetic(spec), std::invalid_argument);
    spec.cartoon = {PolygonShape{{{1, 1}, {40, 1}, {1, 20}}, 0.2}};
    CHECK_THROWS_AS(render_synthetic(spec), std::invalid_argument);
}

TEST_CASE("synthetic spec text round-trips") {
    const SyntheticSpec spec = preset_spec(3, 64);
    const SyntheticSpec back = parse_synthetic_spec(format_synthetic_spec(spec));
    const auto a = render_synthetic(spec);
    const auto b = render_synthetic(back);
    CHECK(a.cartoon == b.cartoon);
    CHECK(oracle::max_abs_diff(oracle::flatten(a.texture), oracle::flatten(b.texture)) <= 1e-12);
    CHECK_THROWS_AS(parse_synthetic_spec("width = 32\nbogus = 1\n"), std::invalid_argument);
}

TEST_CASE("key-value parsing") {
    const auto kv = parse_key_values("# comment\n a = 1 \n\nb= two words # tail\na = 3\n");
    REQUIRE(kv.size() == 3);
    CHECK(kv[0].key == "a");
    CHECK(kv[0].value == "1");
    CHECK(kv[1].value == "two words");
    CHECK(kv[2].line == 5);
    CHECK_THROWS_AS(parse_key_values("novalue\n"), std::invalid_argument);
    CHECK(parse_numbers("1 2.5 -3") == std::vector<double>{1.0, 2.5, -3.0});
}

TEST_CASE("image io round trips") {
    const auto dir = scratch_dir("io");
    const Image img = oracle::random_image(20, 12, 8);
    write_image(dir / "a.png", img, BitDepth::k16);
    const Image png16 = read_image(dir / "a.png");
    CHECK(png16.width() == 20);
    CHECK(png16.height() == 12);
    CHECK(oracle::max_abs_diff(oracle::flatten(png16), oracle::flatten(img)) <= 0.5 / 65535.0 + 1e-12);

    write_image(dir / "b.pgm", img, BitDepth::k8);
    const Image pgm8 = read_image(dir / "b.pgm");
    CHECK(oracle::max_abs_diff(oracle::flatten(pgm8), oracle::flatten(img)) <= 0.5 / 255.0 + 1e-12);
    write_image(dir / "c.pgm", img, BitDepth::k16);
    CHECK(oracle::max_abs_diff(oracle::flatten(read_image(dir / "c.pgm")), oracle::flatten(img)) <=
          0.5 / 65535.0 + 1e-12);

    Image signed_img = img;
    signed_img -= 0.5;
    signed_img *= 0.4;
    write_signed_image(dir / "s.png", signed_img);
    CHECK(oracle::max_abs_diff(oracle::flatten(read_signed_image(dir / "s.png")), oracle::flatten(signed_img)) <=
          0.5 / 65535.0 + 1e-12);

    CHECK_THROWS(read_image(dir / "missing.png"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("stretch_contrast") {
    Image img(8, 8, 0.2);
    CHECK(stretch_contrast(img) == Image(8, 8, 0.5));
    img(3, 3) = 0.6;
    const Image s = stretch_contrast(img);
    CHECK(s.min() == 0.0);
    CHECK(s.max() == 1.0);
}

TEST_CASE("pixel masks") {
    const PixelMask m = PixelMask::random(20, 20, 0.4, 9);
    CHECK(m.known_count() == 240);
    CHECK(PixelMask::random(20, 20, 0.4, 9).to_image() == m.to_image());
    CHECK(PixelMask::from_image(m.to_image()).to_image() == m.to_image());
}

TEST_CASE("neighbour_fill keeps known pixels and fills holes smoothly") {
    const Image img = oracle::random_image(24, 24, 10);
    const PixelMask m = PixelMask::random(24, 24, 0.5, 11);
    const Image filled = neighbour_fill(img, m);
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (m.known(i)) CHECK(filled[i] == img[i]);
    }
    CHECK(filled.all_finite());
    CHECK(filled.min() >= img.min());
    CHECK(filled.max() <= img.max());

    const Image flat(16, 16, 0.7);
    PixelMask one(16, 16, false);
    one.set(4, 9, true);
    const Image f = neighbour_fill(flat, one);
    CHECK(oracle::max_abs_diff(oracle::flatten(f), oracle::flatten(flat)) <= 1e-15);
    CHECK_THROWS_AS(neighbour_fill(flat, PixelMask(16, 16, false)), std::invalid_argument);
    CHECK_THROWS_AS(neighbour_fill(flat, one, -1), std::invalid_argument);
}

}  // TEST_SUITE
