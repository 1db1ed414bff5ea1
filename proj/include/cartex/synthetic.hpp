#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "cartex/image.hpp"

namespace cartex {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct DiskShape {
    Point center;
    double radius = 0.0;
    double intensity = 0.0;
};

struct PolygonShape {
    std::vector<Point> vertices;
    double intensity = 0.0;
};

using CartoonShape = std::variant<DiskShape, PolygonShape>;

/// Support of a sinusoid patch; pixel coordinates, inclusive bounds.
struct FullSupport {};
struct RectSupport {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};
struct DiskSupport {
    Point center;
    double radius = 0.0;
};
using TextureSupport = std::variant<FullSupport, RectSupport, DiskSupport>;

struct SinusoidPatch {
    double frequency = 0.0;    // cycles per pixel
    double orientation = 0.0;  // radians, direction of the wave vector
    double amplitude = 0.0;
    TextureSupport support = FullSupport{};
};

/// Declarative description of a piecewise-constant cartoon plus a sum of
/// windowed sinusoids. Shapes are painted in order over the background.
struct SyntheticSpec {
    int width = 128;
    int height = 128;
    double background = 0.5;
    std::vector<CartoonShape> cartoon;
    std::vector<SinusoidPatch> texture;
    std::uint64_t seed = 0;
};

struct SyntheticImages {
    Image cartoon;
    Image texture;
    Image mix;
};

/// Renders ground-truth layers; mix = clamp01(cartoon + texture). Each
/// sinusoid gets a phase drawn from the seed. Throws if any primitive or
/// support extends outside the canvas.
SyntheticImages render_synthetic(const SyntheticSpec& spec);

/// Key-value schema:
///   width = <int>            height = <int>
///   seed = <int>             background = <intensity>
///   disk = <cx> <cy> <radius> <intensity>
///   polygon = <intensity> <x1> <y1> <x2> <y2> <x3> <y3> ...
///   sinusoid = <freq> <orientation> <amplitude> [full | rect x0 y0 x1 y1 | disk cx cy r]
/// disk, polygon and sinusoid may repeat.
SyntheticSpec parse_synthetic_spec(const std::string& text, const std::string& origin = "<text>");
SyntheticSpec read_synthetic_spec(const std::filesystem::path& path);
std::string format_synthetic_spec(const SyntheticSpec& spec);

/// Deterministic family of cartoon + texture instances (index 0..7 are the
/// benchmark set; other indices are valid too).
SyntheticSpec preset_spec(int index, int size = 128);

/// Vertical step edge at x = width/2 (low / high intensities).
Image step_edge_image(int width, int height, double low = 0.2, double high = 0.8);

/// Sum of two orthogonal sinusoids around a mean level.
Image bidirectional_sinusoid(int width, int height, double period, double amplitude,
                             double mean = 0.5, double angle = 0.0);

}  // namespace cartex
