#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <spdlog/spdlog.h>
#include <vector>

#include "cartex/image_io.hpp"
#include "cartex/metrics.hpp"
#include "cartex/noise.hpp"
#include "cartex/synthetic.hpp"

namespace cartex::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Truth {
    Image cartoon;
    Image texture;
    Image mix;
};

struct PreparedInput {
    Image clean;  // as read
    Image f;      // what the solver sees
    std::optional<PixelMask> mask;
    std::optional<Truth> truth;
};

Image read_input(const fs::path& path, const char* what) {
    if (path.empty()) throw UsageError(std::string("no ") + what + " given");
    if (!fs::is_regular_file(path)) throw UsageError(path.string() + ": " + what + " not found");
    try {
        return read_image(path);
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
}

Truth read_truth(const fs::path& dir) {
    Truth t;
    t.cartoon = read_input(dir / "cartoon.png", "truth cartoon");
    try {
        t.texture = read_signed_image(dir / "texture.png");
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
    const fs::path mix = dir / "mix.png";
    t.mix = fs::is_regular_file(mix) ? read_input(mix, "truth mix") : clamp01(t.cartoon + t.texture);
    if (!t.cartoon.same_shape(t.texture) || !t.cartoon.same_shape(t.mix)) {
        throw UsageError(dir.string() + ": truth images differ in size");
    }
    return t;
}

PreparedInput prepare(const RunConfig& config) {
    PreparedInput in;
    in.clean = read_input(config.input, "input image");
    in.f = in.clean;
    if (config.add_noise > 0.0) in.f = add_gaussian_noise(in.clean, config.add_noise, config.seed);
    if (!config.mask.empty()) {
        const Image m = read_input(config.mask, "mask image");
        if (!m.same_shape(in.f)) throw UsageError(config.mask.string() + ": mask size differs from input");
        in.mask = PixelMask::from_image(m);
    } else if (config.mode == Mode::inpaint && config.missing > 0.0) {
        in.mask = PixelMask::random(in.f.width(), in.f.height(), config.missing, config.seed);
    }
    if (config.mode == Mode::inpaint) {
        if (!in.mask) throw UsageError("inpaint mode needs --mask or --missing");
        if (in.mask->known_fraction() < 0.3) throw UsageError("mask keeps fewer than 30% of the pixels");
        in.f = zero_fill(in.f, *in.mask);
    } else if (in.mask) {
        spdlog::warn("mask ignored outside inpaint mode");
        in.mask.reset();
    }
    if (!config.truth.empty()) {
        in.truth = read_truth(config.truth);
        if (!in.truth->cartoon.same_shape(in.f)) throw UsageError("truth images differ in size from input");
    }
    return in;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw UsageError(dir.string() + ": cannot create output directory");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw UsageError(path.string() + ": write failed");
}

struct Scores {
    double cartoon_psnr = 0.0, cartoon_ssim = 0.0;
    double texture_psnr = 0.0, texture_ssim = 0.0;
    double recovered_psnr = 0.0, recovered_ssim = 0.0;
};

Scores score(const Image& u, const Image& v, const Truth& truth) {
    Scores s;
    s.cartoon_psnr = psnr(u, truth.cartoon);
    s.cartoon_ssim = ssim(u, truth.cartoon);
    s.texture_psnr = psnr(v, truth.texture);
    s.texture_ssim = ssim(v, truth.texture);
    const Image uv = u + v;
    s.recovered_psnr = psnr(uv, truth.mix);
    s.recovered_ssim = ssim(uv, truth.mix);
    return s;
}

// Pixels within one pixel of a jump in the true cartoon: a 3-pixel tube
// around every contour.
std::vector<std::size_t> edge_tube(const Image& cartoon) {
    const int w = cartoon.width(), h = cartoon.height();
    std::vector<unsigned char> edge(cartoon.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double c = cartoon(x, y);
            if ((x + 1 < w && std::abs(cartoon(x + 1, y) - c) > 1e-9) ||
                (y + 1 < h && std::abs(cartoon(x, y + 1) - c) > 1e-9)) {
                edge[cartoon.index(x, y)] = 1;
            }
        }
    }
    std::vector<std::size_t> tube;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool hit = false;
            for (int dy = -1; dy <= 1 && !hit; ++dy) {
                for (int dx = -1; dx <= 1 && !hit; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    hit = xx >= 0 && yy >= 0 && xx < w && yy < h && edge[cartoon.index(xx, yy)];
                }
            }
            if (hit) tube.push_back(cartoon.index(x, y));
        }
    }
    return tube;
}

double tube_energy(const Image& v, const std::vector<std::size_t>& tube) {
    double s = 0.0;
    for (std::size_t i : tube) s += v[i] * v[i];
    return std::sqrt(s);
}

// sup |f - u - v| over the observed pixels.
double constraint_gap(const PreparedInput& in, const DecompositionResult& r) {
    const Image gap = in.f - r.cartoon - r.texture;
    double m = 0.0;
    for (std::size_t i = 0; i < gap.size(); ++i) {
        if (!in.mask || in.mask->known(i)) m = std::max(m, std::abs(gap[i]));
    }
    return m;
}

std::string fixed(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void log_iteration(const IterationRecord& r) {
    if (r.iteration > 0) {
        spdlog::debug("iter {:3d}  split {:.3e}  rel {:.3e}  data {:.4e}  energy {:.6e}  cg {:3d} ({:.1e})",
                      r.iteration, r.splitting_residual, r.relative_splitting, r.data_term, r.objective,
                      r.cg_iterations, r.cg_residual);
    } else {
        spdlog::debug("pass {:3d}  constraint {:.3e}  cg {:3d} ({:.1e})", r.pass, r.constraint_residual,
                      r.cg_iterations, r.cg_residual);
    }
}

struct RunOutcome {
    DecompositionResult result;
    std::optional<Scores> scores;
    std::size_t laplacian_nonzeros = 0;
    std::size_t isolated_rows = 0;
};

ordered_json diagnostics_json(const std::vector<IterationRecord>& records) {
    ordered_json out = ordered_json::array();
    for (const auto& r : records) {
        out.push_back({{"pass", r.pass},
                       {"iteration", r.iteration},
                       {"splitting_residual", r.splitting_residual},
                       {"relative_splitting", r.relative_splitting},
                       {"data_term", r.data_term},
                       {"energy", r.objective},
                       {"lambda_updated", r.lambda_updated},
                       {"cg_iterations", r.cg_iterations},
                       {"cg_residual", r.cg_residual},
                       {"cg_converged", r.cg_converged},
                       {"constraint_residual", r.constraint_residual}});
    }
    return out;
}

ordered_json scores_json(const Scores& s) {
    return {{"cartoon_psnr", s.cartoon_psnr}, {"cartoon_ssim", s.cartoon_ssim},
            {"texture_psnr", s.texture_psnr}, {"texture_ssim", s.texture_ssim},
            {"recovered_psnr", s.recovered_psnr}, {"recovered_ssim", s.recovered_ssim}};
}

void write_summaries(const RunConfig& config, const PreparedInput& in, const RunOutcome& run) {
    const auto& r = run.result;
    const double input_psnr = in.truth ? psnr(in.f, in.truth->mix) : 0.0;
    const double input_ssim = in.truth ? ssim(in.f, in.truth->mix) : 0.0;

    if (config.report != ReportFormat::json) {
        std::ostringstream text;
        text << "# cartex run summary; the key-value lines reproduce the run when used as --config\n";
        text << format_config(config);
        text << "# constraint_met: " << (r.constraint_met ? "true" : "false") << '\n';
        text << "# constraint_residual: " << constraint_gap(in, r) << '\n';
        text << "# iterations: " << r.diagnostics.size() << " (constraint passes " << r.passes << ")\n";
        text << "# cg_iterations_total: " << r.cg_iterations_total << '\n';
        text << "# cg_iterations_max: " << r.cg_iterations_max << '\n';
        if (!r.diagnostics.empty()) {
            const auto& last = r.diagnostics.back();
            text << "# final_relative_splitting: " << last.relative_splitting << '\n';
        }
        text << "# laplacian_nonzeros: " << run.laplacian_nonzeros << '\n';
        text << "# isolated_rows: " << run.isolated_rows << '\n';
        if (in.mask) text << "# known_fraction: " << in.mask->known_fraction() << '\n';
        if (run.scores) {
            const auto& s = *run.scores;
            text << "# input_psnr: " << fixed(input_psnr, 4) << "  input_ssim: " << fixed(input_ssim, 4) << '\n';
            text << "# cartoon_psnr: " << fixed(s.cartoon_psnr, 4) << "  cartoon_ssim: " << fixed(s.cartoon_ssim, 4)
                 << '\n';
            text << "# texture_psnr: " << fixed(s.texture_psnr, 4) << "  texture_ssim: " << fixed(s.texture_ssim, 4)
                 << '\n';
            text << "# recovered_psnr: " << fixed(s.recovered_psnr, 4)
                 << "  recovered_ssim: " << fixed(s.recovered_ssim, 4) << '\n';
        }
        for (const auto& w : r.warnings) text << "# warning: " << w << '\n';
        write_text(config.out / "summary.txt", text.str());
    }
    if (config.report != ReportFormat::text) {
        ordered_json cfg = ordered_json::object();
        for (const auto& kv : parse_settings(format_config(config), "<summary>")) cfg[kv.first] = kv.second;
        ordered_json j = {{"config", cfg},
                          {"constraint_met", r.constraint_met},
                          {"constraint_residual", constraint_gap(in, r)},
                          {"passes", r.passes},
                          {"cg_iterations_total", r.cg_iterations_total},
                          {"cg_iterations_max", r.cg_iterations_max},
                          {"cg_all_converged", r.cg_all_converged},
                          {"laplacian_nonzeros", run.laplacian_nonzeros},
                          {"isolated_rows", run.isolated_rows},
                          {"warnings", r.warnings}};
        if (run.scores) {
            j["input_psnr"] = input_psnr;
            j["input_ssim"] = input_ssim;
            j["scores"] = scores_json(*run.scores);
        }
        j["diagnostics"] = diagnostics_json(r.diagnostics);
        write_text(config.out / "summary.json", j.dump(2) + "\n");
    }
}

RunOutcome run_and_write(const RunConfig& config, const PreparedInput& in) {
    const auto t0 = std::chrono::steady_clock::now();
    Decomposer decomposer(in.f, config.options, in.mask);
    const auto t1 = std::chrono::steady_clock::now();
    const auto& lap = decomposer.system().laplacian();
    spdlog::info("graph: {} ({} nonzeros, {} isolated rows) in {:.2f} s",
                 config.options.graph.isotropic ? "isotropic" : "union neighbourhood", lap.nonzeros(),
                 lap.isolated_rows().size(), std::chrono::duration<double>(t1 - t0).count());

    RunOutcome run;
    run.result = decomposer.run(log_iteration);
    run.laplacian_nonzeros = lap.nonzeros();
    run.isolated_rows = lap.isolated_rows().size();
    const auto t2 = std::chrono::steady_clock::now();
    spdlog::info("{} solve: {} records, {} CG iterations in {:.2f} s", to_string(config.mode),
                 run.result.diagnostics.size(), run.result.cg_iterations_total,
                 std::chrono::duration<double>(t2 - t1).count());
    for (const auto& w : run.result.warnings) spdlog::warn("{}", w);

    const auto& r = run.result;
    ensure_directory(config.out);
    write_image(config.out / "u.png", r.cartoon, BitDepth::k16);
    write_signed_image(config.out / "v.png", r.texture);
    write_image(config.out / "v_preview.png", stretch_contrast(r.texture));
    if (config.mode == Mode::noisy) write_signed_image(config.out / "noise.png", r.residual);
    if (config.mode == Mode::inpaint) {
        write_image(config.out / "recovered.png", r.residual, BitDepth::k16);
        write_image(config.out / "mask.png", in.mask->to_image());
    }
    if (config.add_noise > 0.0 || config.mode == Mode::inpaint) {
        write_image(config.out / "input.png", in.f, BitDepth::k16);
    }
    if (config.dump_graph) write_text(config.out / "laplacian.txt", format_triplets(lap));
    if (in.truth) run.scores = score(r.cartoon, r.texture, *in.truth);
    write_summaries(config, in, run);
    if (run.scores) {
        spdlog::info("cartoon {:.2f} dB / {:.3f}, texture {:.2f} dB / {:.3f}, u+v {:.2f} dB / {:.3f}",
                     run.scores->cartoon_psnr, run.scores->cartoon_ssim, run.scores->texture_psnr,
                     run.scores->texture_ssim, run.scores->recovered_psnr, run.scores->recovered_ssim);
    }
    return run;
}

fs::path first_existing(const fs::path& dir, std::initializer_list<const char*> names) {
    for (const char* n : names) {
        if (fs::is_regular_file(dir / n)) return dir / n;
    }
    return {};
}

bool is_result_dir(const fs::path& dir) { return !first_existing(dir, {"u.png", "cartoon.png"}).empty(); }

Image read_signed(const fs::path& path) {
    try {
        return read_signed_image(path);
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
}

}  // namespace

void cmd_decompose(const RunConfig& config) {
    const PreparedInput in = prepare(config);
    spdlog::info("{}: {}x{}, mode {}", config.input.string(), in.f.width(), in.f.height(), to_string(config.mode));
    run_and_write(config, in);
}

void cmd_synthesize(const SynthesizeRequest& request) {
    if (request.count < 1) throw UsageError("count must be >= 1");
    if (request.size < Image::kMinSide) throw UsageError("size too small");
    std::vector<std::pair<fs::path, SyntheticSpec>> jobs;
    try {
        if (!request.spec.empty()) {
            if (!fs::is_regular_file(request.spec)) throw UsageError(request.spec.string() + ": spec not found");
            jobs.emplace_back(request.out, read_synthetic_spec(request.spec));
        } else if (request.count == 1) {
            jobs.emplace_back(request.out, preset_spec(request.preset, request.size));
        } else {
            for (int k = 0; k < request.count; ++k) {
                const int idx = request.preset + k;
                char name[32];
                std::snprintf(name, sizeof name, "preset_%02d", idx);
                jobs.emplace_back(request.out / name, preset_spec(idx, request.size));
            }
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    for (auto& [dir, spec] : jobs) {
        if (request.seed) spec.seed = *request.seed;
        SyntheticImages images;
        try {
            images = render_synthetic(spec);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        ensure_directory(dir);
        write_image(dir / "cartoon.png", images.cartoon, BitDepth::k16);
        write_signed_image(dir / "texture.png", images.texture);
        write_image(dir / "mix.png", images.mix, BitDepth::k16);
        write_text(dir / "spec.txt", format_synthetic_spec(spec));
        spdlog::info("wrote {}", dir.string());
    }
}

void cmd_metrics(const fs::path& results, const fs::path& truth, const fs::path& out) {
    if (!fs::is_directory(results)) throw UsageError(results.string() + ": not a directory");
    if (!fs::is_directory(truth)) throw UsageError(truth.string() + ": not a directory");
    std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pairs;
    if (is_result_dir(results)) {
        pairs.push_back({results.filename().string(), {results, truth}});
    } else {
        std::vector<fs::path> subdirs;
        for (const auto& e : fs::directory_iterator(results)) {
            if (e.is_directory() && is_result_dir(e.path())) subdirs.push_back(e.path());
        }
        std::sort(subdirs.begin(), subdirs.end());
        for (const auto& d : subdirs) {
            const fs::path t = truth / d.filename();
            if (!fs::is_directory(t)) throw UsageError(t.string() + ": missing truth counterpart");
            pairs.push_back({d.filename().string(), {d, t}});
        }
    }
    if (pairs.empty()) throw UsageError(results.string() + ": no result images found");

    std::ostringstream csv, text;
    csv << "image,cartoon_psnr,cartoon_ssim,texture_psnr,texture_ssim\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %12s %12s %12s %12s\n", "image", "cartoon PSNR", "cartoon SSIM",
                  "texture PSNR", "texture SSIM");
    text << line;
    double sums[4] = {0, 0, 0, 0};
    for (const auto& [name, dirs] : pairs) {
        const Truth t = read_truth(dirs.second);
        const Image u = read_input(first_existing(dirs.first, {"u.png", "cartoon.png"}), "cartoon result");
        const fs::path vpath = first_existing(dirs.first, {"v.png", "texture.png"});
        if (vpath.empty()) throw UsageError(dirs.first.string() + ": missing v.png");
        const Image v = read_signed(vpath);
        if (!u.same_shape(t.cartoon) || !v.same_shape(t.texture)) {
            throw UsageError(name + ": result and truth differ in size");
        }
        const double row[4] = {psnr(u, t.cartoon), ssim(u, t.cartoon), psnr(v, t.texture), ssim(v, t.texture)};
        for (int k = 0; k < 4; ++k) sums[k] += row[k];
        csv << name << ',' << fixed(row[0], 4) << ',' << fixed(row[1], 4) << ',' << fixed(row[2], 4) << ','
            << fixed(row[3], 4) << '\n';
        std::snprintf(line, sizeof line, "%-24s %12.2f %12.4f %12.2f %12.4f\n", name.c_str(), row[0], row[1],
                      row[2], row[3]);
        text << line;
    }
    const double n = static_cast<double>(pairs.size());
    csv << "mean," << fixed(sums[0] / n, 4) << ',' << fixed(sums[1] / n, 4) << ',' << fixed(sums[2] / n, 4) << ','
        << fixed(sums[3] / n, 4) << '\n';
    std::snprintf(line, sizeof line, "%-24s %12.2f %12.4f %12.2f %12.4f\n", "mean", sums[0] / n, sums[1] / n,
                  sums[2] / n, sums[3] / n);
    text << line;

    const fs::path dest = out.empty() ? results : out;
    ensure_directory(dest);
    write_text(dest / "metrics.csv", csv.str());
    write_text(dest / "metrics.txt", text.str());
    std::fputs(text.str().c_str(), stdout);
}

void cmd_ablate(const RunConfig& config) {
    const PreparedInput in = prepare(config);
    std::optional<std::vector<std::size_t>> tube;
    if (in.truth) tube = edge_tube(in.truth->cartoon);

    std::ostringstream csv, text;
    csv << "method,laplacian_nonzeros,texture_norm,edge_tube_texture,cartoon_psnr,cartoon_ssim,texture_psnr,"
           "texture_ssim\n";
    char line[200];
    std::snprintf(line, sizeof line, "%-12s %10s %12s %12s %12s %12s %12s %12s\n", "method", "nnz", "||v||",
                  "edge ||v||", "cartoon dB", "cartoon SSIM", "texture dB", "texture SSIM");
    text << line;
    for (const bool isotropic : {true, false}) {
        RunConfig c = config;
        c.options.graph.isotropic = isotropic;
        const char* name = isotropic ? "isotropic" : "baseline";
        c.out = config.out / name;
        const RunOutcome run = run_and_write(c, in);
        const Image& v = run.result.texture;
        const double vnorm = norm2(v.pixels());
        const std::string edge = tube ? fixed(tube_energy(v, *tube), 6) : "";
        std::string cols[4] = {"", "", "", ""};
        if (run.scores) {
            cols[0] = fixed(run.scores->cartoon_psnr, 4);
            cols[1] = fixed(run.scores->cartoon_ssim, 4);
            cols[2] = fixed(run.scores->texture_psnr, 4);
            cols[3] = fixed(run.scores->texture_ssim, 4);
        }
        csv << name << ',' << run.laplacian_nonzeros << ',' << fixed(vnorm, 6) << ',' << edge << ',' << cols[0] << ','
            << cols[1] << ',' << cols[2] << ',' << cols[3] << '\n';
        auto dash = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
        std::snprintf(line, sizeof line, "%-12s %10zu %12.6f %12s %12s %12s %12s %12s\n", name,
                      run.laplacian_nonzeros, vnorm, dash(edge).c_str(), dash(cols[0]).c_str(),
                      dash(cols[1]).c_str(), dash(cols[2]).c_str(), dash(cols[3]).c_str());
        text << line;
    }
    write_text(config.out / "ablation.csv", csv.str());
    write_text(config.out / "ablation.txt", text.str());
    std::fputs(text.str().c_str(), stdout);
}

}  // namespace cartex::cli
