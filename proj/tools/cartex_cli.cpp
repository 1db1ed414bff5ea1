#include <CLI11.hpp>
#include <cstdio>
#include <map>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <string>

#include "commands.hpp"
#include "run_config.hpp"

namespace {

using namespace cartex;
using namespace cartex::cli;

// Every config key becomes --<key>; only flags actually given override the
// config file.
struct RunFlags {
    std::string config;
    std::map<std::string, std::string> values;
    bool dump_graph = false;

    void attach(CLI::App& app) {
        app.add_option("--config", config, "Flat key = value file; flags override it");
        for (const auto& key : config_keys()) {
            if (key == "dump-graph") continue;
            app.add_option("--" + key, values[key], "See README for the meaning of '" + key + "'");
        }
        app.add_flag("--dump-graph", dump_graph, "Write the nonlocal Laplacian as triplets");
    }

    RunConfig resolve_with(CLI::App& app, const char* forced_mode) const {
        Settings settings;
        if (!config.empty()) settings = read_settings(config);
        for (const auto& [key, value] : values) {
            if (app.count("--" + key) > 0) settings[key] = value;
        }
        if (dump_graph) settings["dump-graph"] = "true";
        if (forced_mode) {
            if (const auto it = settings.find("mode"); it != settings.end() && it->second != forced_mode) {
                throw UsageError(std::string(app.get_name()) + " runs in " + forced_mode + " mode, not " + it->second);
            }
            settings["mode"] = forced_mode;
        }
        return resolve(settings);
    }
};

void set_log_level(const std::string& level) {
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "warn") spdlog::set_level(spdlog::level::warn);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::set_level(spdlog::level::info);
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_st("cartex");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);

    CLI::App app{"Cartoon-texture image decomposition with a directional nonlocal Laplacian"};
    app.require_subcommand(1);

    struct Runner {
        CLI::App* app;
        RunFlags flags;
        const char* mode;
        bool ablate;
    };
    std::vector<std::unique_ptr<Runner>> runners;
    auto add_runner = [&](const char* name, const char* help, const char* mode, bool ablate) {
        auto r = std::make_unique<Runner>();
        r->app = app.add_subcommand(name, help);
        // --h is the similarity bandwidth, so help is long-form only.
        r->app->set_help_flag("--help", "Print this help message and exit");
        r->flags.attach(*r->app);
        r->mode = mode;
        r->ablate = ablate;
        runners.push_back(std::move(r));
    };
    add_runner("decompose", "Split an image into cartoon and texture (mode from --mode)", nullptr, false);
    add_runner("denoise", "Noisy-mode decomposition; writes the removed noise too", "noisy", false);
    add_runner("inpaint", "Decomposition with missing pixels (--mask or --missing)", "inpaint", false);
    add_runner("ablate", "Isotropic versus union-neighbourhood graph on the same input", nullptr, true);

    SynthesizeRequest synth;
    std::string synth_spec, synth_out = "truth", synth_log = "info";
    long long synth_seed = -1;
    auto* synthesize = app.add_subcommand("synthesize", "Render cartoon, texture and mix ground truth");
    synthesize->add_option("--spec", synth_spec, "Synthetic spec file (key = value)");
    synthesize->add_option("--preset", synth.preset, "First built-in preset index");
    synthesize->add_option("--count", synth.count, "Number of consecutive presets, one subdirectory each");
    synthesize->add_option("--size", synth.size, "Preset canvas size");
    synthesize->add_option("--seed", synth_seed, "Override the scene file's phase seed");
    synthesize->add_option("--out", synth_out, "Output directory");
    synthesize->add_option("--log-level", synth_log, "error, warn, info or debug");

    std::string metrics_results, metrics_truth, metrics_out, metrics_log = "info";
    auto* metrics = app.add_subcommand("metrics", "PSNR/SSIM of result directories against ground truth");
    metrics->add_option("--results", metrics_results, "Result directory (or directory of result directories)")
        ->required();
    metrics->add_option("--truth", metrics_truth, "Ground-truth directory with the same layout")->required();
    metrics->add_option("--out", metrics_out, "Where metrics.txt and metrics.csv go (default: --results)");
    metrics->add_option("--log-level", metrics_log, "error, warn, info or debug");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& r : runners) {
            if (!r->app->parsed()) continue;
            const RunConfig config = r->flags.resolve_with(*r->app, r->mode);
            set_log_level(config.log_level);
            if (r->ablate) {
                cmd_ablate(config);
            } else {
                cmd_decompose(config);
            }
        }
        if (synthesize->parsed()) {
            set_log_level(synth_log);
            synth.spec = synth_spec;
            synth.out = synth_out;
            if (synth_seed >= 0) synth.seed = static_cast<std::uint64_t>(synth_seed);
            cmd_synthesize(synth);
        }
        if (metrics->parsed()) {
            set_log_level(metrics_log);
            cmd_metrics(metrics_results, metrics_truth, metrics_out);
        }
    } catch (const NumericalError& e) {
        spdlog::error("numerical failure: {}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
