#include "cartex/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "cartex/keyvalue.hpp"

namespace cartex {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool inside_canvas(double x, double y, const SyntheticSpec& s) {
    return x >= 0.0 && y >= 0.0 && x <= s.width - 1 && y <= s.height - 1;
}

void validate(const SyntheticSpec& spec) {
    if (spec.width < Image::kMinSide || spec.height < Image::kMinSide) {
        throw std::invalid_argument("synthetic canvas must be at least 8x8");
    }
    for (const auto& shape : spec.cartoon) {
        std::visit(overloaded{
                       [&](const DiskShape& d) {
                           if (d.radius <= 0.0 ||
                               !inside_canvas(d.center.x - d.radius, d.center.y - d.radius, spec) ||
                               !inside_canvas(d.center.x + d.radius, d.center.y + d.radius, spec)) {
                               throw std::invalid_argument("disk primitive outside canvas");
                           }
                       },
                       [&](const PolygonShape& p) {
                           if (p.vertices.size() < 3) {
                               throw std::invalid_argument("polygon needs at least 3 vertices");
                           }
                           for (const auto& v : p.vertices) {
                               if (!inside_canvas(v.x, v.y, spec)) {
                                   throw std::invalid_argument("polygon vertex outside canvas");
                               }
                           }
                       }},
                   shape);
    }
    for (const auto& t : spec.texture) {
        if (t.frequency < 0.0 || t.amplitude < 0.0) {
            throw std::invalid_argument("sinusoid frequency and amplitude must be non-negative");
        }
        std::visit(overloaded{
                       [](const FullSupport&) {},
                       [&](const RectSupport& r) {
                           if (r.x1 < r.x0 || r.y1 < r.y0 || !inside_canvas(r.x0, r.y0, spec) ||
                               !inside_canvas(r.x1, r.y1, spec)) {
                               throw std::invalid_argument("sinusoid support outside canvas");
                           }
                       },
                       [&](const DiskSupport& d) {
                           if (d.radius <= 0.0 ||
                               !inside_canvas(d.center.x - d.radius, d.center.y - d.radius, spec) ||
                               !inside_canvas(d.center.x + d.radius, d.center.y + d.radius, spec)) {
                               throw std::invalid_argument("sinusoid support outside canvas");
                           }
                       }},
                   t.support);
    }
}

// Even-odd rule at pixel centres.
bool point_in_polygon(const std::vector<Point>& poly, double x, double y) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point& a = poly[i];
        const Point& b = poly[j];
        if ((a.y > y) != (b.y > y)) {
            const double xc = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (x < xc) inside = !inside;
        }
    }
    return inside;
}

bool in_support(const TextureSupport& support, double x, double y) {
    return std::visit(overloaded{
                          [](const FullSupport&) { return true; },
                          [&](const RectSupport& r) {
                              return x >= r.x0 && x <= r.x1 && y >= r.y0 && y <= r.y1;
                          },
                          [&](const DiskSupport& d) {
                              const double ex = x - d.center.x;
                              const double ey = y - d.center.y;
                              return ex * ex + ey * ey <= d.radius * d.radius;
                          }},
                      support);
}

std::string format_number(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

SyntheticImages render_synthetic(const SyntheticSpec& spec) {
    validate(spec);
    SyntheticImages out{Image(spec.width, spec.height, spec.background),
                        Image(spec.width, spec.height, 0.0), Image(spec.width, spec.height)};
    for (const auto& shape : spec.cartoon) {
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                std::visit(overloaded{
                               [&](const DiskShape& d) {
                                   const double ex = x - d.center.x;
                                   const double ey = y - d.center.y;
                                   if (ex * ex + ey * ey <= d.radius * d.radius) {
                                       out.cartoon(x, y) = d.intensity;
                                   }
                               },
                               [&](const PolygonShape& p) {
                                   if (point_in_polygon(p.vertices, x, y)) out.cartoon(x, y) = p.intensity;
                               }},
                           shape);
            }
        }
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> phase_dist(0.0, kTwoPi);
    for (const auto& t : spec.texture) {
        const double phase = phase_dist(rng);
        const double kx = kTwoPi * t.frequency * std::cos(t.orientation);
        const double ky = kTwoPi * t.frequency * std::sin(t.orientation);
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                if (in_support(t.support, x, y)) {
                    out.texture(x, y) += t.amplitude * std::sin(kx * x + ky * y + phase);
                }
            }
        }
    }
    out.mix = clamp01(out.cartoon + out.texture);
    return out;
}

SyntheticSpec parse_synthetic_spec(const std::string& text, const std::string& origin) {
    SyntheticSpec spec;
    spec.cartoon.clear();
    spec.texture.clear();
    for (const auto& kv : parse_key_values(text, origin)) {
        const auto where = origin + ":" + std::to_string(kv.line) + ": ";
        try {
            if (kv.key == "width" || kv.key == "height" || kv.key == "seed" || kv.key == "background") {
                const auto v = parse_numbers(kv.value);
                if (v.size() != 1) throw std::invalid_argument("expected one number");
                if (kv.key == "width") spec.width = static_cast<int>(v[0]);
                if (kv.key == "height") spec.height = static_cast<int>(v[0]);
                if (kv.key == "seed") spec.seed = static_cast<std::uint64_t>(v[0]);
                if (kv.key == "background") spec.background = v[0];
            } else if (kv.key == "disk") {
                const auto v = parse_numbers(kv.value);
                if (v.size() != 4) throw std::invalid_argument("disk takes cx cy radius intensity");
                spec.cartoon.emplace_back(DiskShape{{v[0], v[1]}, v[2], v[3]});
            } else if (kv.key == "polygon") {
                const auto v = parse_numbers(kv.value);
                if (v.size() < 7 || v.size() % 2 == 0) {
                    throw std::invalid_argument("polygon takes intensity then >= 3 vertex pairs");
                }
                PolygonShape p;
                p.intensity = v[0];
                for (std::size_t k = 1; k < v.size(); k += 2) p.vertices.push_back({v[k], v[k + 1]});
                spec.cartoon.emplace_back(std::move(p));
            } else if (kv.key == "sinusoid") {
                std::istringstream in(kv.value);
                std::vector<std::string> tok;
                for (std::string t; in >> t;) tok.push_back(t);
                if (tok.size() < 3) throw std::invalid_argument("sinusoid takes freq orientation amplitude [support]");
                SinusoidPatch s;
                s.frequency = parse_numbers(tok[0]).at(0);
                s.orientation = parse_numbers(tok[1]).at(0);
                s.amplitude = parse_numbers(tok[2]).at(0);
                std::string rest;
                for (std::size_t k = 4; k < tok.size(); ++k) rest += tok[k] + " ";
                const std::string kind = tok.size() > 3 ? tok[3] : "full";
                const auto nums = parse_numbers(rest);
                if (kind == "full" && nums.empty()) {
                    s.support = FullSupport{};
                } else if (kind == "rect" && nums.size() == 4) {
                    s.support = RectSupport{nums[0], nums[1], nums[2], nums[3]};
                } else if (kind == "disk" && nums.size() == 3) {
                    s.support = DiskSupport{{nums[0], nums[1]}, nums[2]};
                } else {
                    throw std::invalid_argument("bad sinusoid support '" + kind + "'");
                }
                spec.texture.push_back(s);
            } else {
                throw std::invalid_argument("unknown key '" + kv.key + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + e.what());
        }
    }
    validate(spec);
    return spec;
}

SyntheticSpec read_synthetic_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_synthetic_spec(ss.str(), path.string());
}

std::string format_synthetic_spec(const SyntheticSpec& spec) {
    std::ostringstream out;
    out << "width = " << spec.width << '\n'
        << "height = " << spec.height << '\n'
        << "seed = " << spec.seed << '\n'
        << "background = " << format_number(spec.background) << '\n';
    for (const auto& shape : spec.cartoon) {
        std::visit(overloaded{
                       [&](const DiskShape& d) {
                           out << "disk = " << format_number(d.center.x) << ' ' << format_number(d.center.y)
                               << ' ' << format_number(d.radius) << ' ' << format_number(d.intensity) << '\n';
                       },
                       [&](const PolygonShape& p) {
                           out << "polygon = " << format_number(p.intensity);
                           for (const auto& v : p.vertices) {
                               out << ' ' << format_number(v.x) << ' ' << format_number(v.y);
                           }
                           out << '\n';
                       }},
                   shape);
    }
    for (const auto& t : spec.texture) {
        out << "sinusoid = " << format_number(t.frequency) << ' ' << format_number(t.orientation) << ' '
            << format_number(t.amplitude) << ' ';
        std::visit(overloaded{
                       [&](const FullSupport&) { out << "full"; },
                       [&](const RectSupport& r) {
                           out << "rect " << format_number(r.x0) << ' ' << format_number(r.y0) << ' '
                               << format_number(r.x1) << ' ' << format_number(r.y1);
                       },
                       [&](const DiskSupport& d) {
                           out << "disk " << format_number(d.center.x) << ' ' << format_number(d.center.y)
                               << ' ' << format_number(d.radius);
                       }},
                   t.support);
        out << '\n';
    }
    return out.str();
}

SyntheticSpec preset_spec(int index, int size) {
    if (size < 32) throw std::invalid_argument("preset_spec: size must be at least 32");
    SyntheticSpec spec;
    spec.width = size;
    spec.height = size;
    spec.seed = 1000 + static_cast<std::uint64_t>(index);
    std::mt19937_64 rng(spec.seed);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    const double s = size;

    spec.background = uniform(0.28, 0.36);

    // Disk in one half, convex polygon in the other; they may overlap.
    const bool disk_left = index % 2 == 0;
    const double r = uniform(0.16, 0.24) * s;
    const double dcx = disk_left ? uniform(0.30, 0.38) * s : uniform(0.62, 0.70) * s;
    const double dcy = uniform(0.35, 0.65) * s;
    spec.cartoon.emplace_back(DiskShape{{dcx, dcy}, r, uniform(0.62, 0.72)});

    PolygonShape poly;
    poly.intensity = index % 3 == 0 ? uniform(0.45, 0.52) : uniform(0.19, 0.23);
    const int corners = 3 + index % 3;
    const double pcx = disk_left ? 0.68 * s : 0.32 * s;
    const double pcy = uniform(0.35, 0.65) * s;
    const double pr = uniform(0.20, 0.26) * s;
    const double start = uniform(0.0, kTwoPi);
    for (int k = 0; k < corners; ++k) {
        const double a = start + kTwoPi * k / corners + uniform(-0.2, 0.2);
        poly.vertices.push_back({std::clamp(pcx + pr * std::cos(a), 1.0, s - 2.0),
                                 std::clamp(pcy + pr * std::sin(a), 1.0, s - 2.0)});
    }
    spec.cartoon.emplace_back(std::move(poly));

    // Bidirectional texture in a band of the image, oriented per instance.
    const double freq = uniform(0.16, 0.24);
    const double theta = uniform(0.0, std::numbers::pi);
    const double amp = uniform(0.06, 0.08);
    const bool horizontal_band = index % 4 < 2;
    RectSupport band = horizontal_band ? RectSupport{0.0, 0.30 * s, s - 1.0, 0.70 * s}
                                       : RectSupport{0.30 * s, 0.0, 0.70 * s, s - 1.0};
    spec.texture.push_back({freq, theta, amp, band});
    spec.texture.push_back({freq, theta + std::numbers::pi / 2.0, amp, band});

    // A second, finer texture patch in a corner disk.
    const double tr = 0.11 * s;
    const Point tc{index % 4 == 1 || index % 4 == 2 ? 0.18 * s : 0.82 * s,
                   index < 4 ? 0.18 * s : 0.82 * s};
    const double f2 = uniform(0.22, 0.30);
    const double t2 = uniform(0.0, std::numbers::pi);
    spec.texture.push_back({f2, t2, 0.09, DiskSupport{tc, tr}});
    spec.texture.push_back({f2, t2 + std::numbers::pi / 2.0, 0.09, DiskSupport{tc, tr}});
    return spec;
}

Image step_edge_image(int width, int height, double low, double high) {
    Image img(width, height, low);
    for (int y = 0; y < height; ++y) {
        for (int x = width / 2; x < width; ++x) img(x, y) = high;
    }
    return img;
}

Image bidirectional_sinusoid(int width, int height, double period, double amplitude, double mean,
                             double angle) {
    Image img(width, height, mean);
    const double k = kTwoPi / period;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double u = c * x + s * y;
            const double v = -s * x + c * y;
            img(x, y) = mean + amplitude * (std::sin(k * u) + std::sin(k * v));
        }
    }
    return img;
}

}  // namespace cartex
