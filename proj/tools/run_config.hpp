#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cartex/solver.hpp"

namespace cartex::cli {

/// Bad flags, bad config keys or values, unreadable or unwritable paths.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ReportFormat { text, json, both };

/// Everything one run depends on. Solver defaults follow the mode; any key
/// set explicitly overrides them.
struct RunConfig {
    Mode mode = Mode::noiseless;
    std::filesystem::path input;
    std::filesystem::path mask;     // optional; inpaint mode
    std::filesystem::path truth;    // optional; directory with cartoon.png / texture.png
    std::filesystem::path out = "out";
    DecomposerOptions options;
    std::uint64_t seed = 0;
    /// Gaussian noise added to the input before decomposing (0 = none).
    double add_noise = 0.0;
    /// Random missing fraction used when inpaint mode has no mask file.
    double missing = 0.0;
    ReportFormat report = ReportFormat::both;
    bool dump_graph = false;
    /// error, warn, info or debug; debug logs every iteration.
    std::string log_level = "info";
};

/// Ordered key -> value settings; later assignments win.
using Settings = std::map<std::string, std::string>;

/// Keys accepted in config files and as --<key> flags.
const std::vector<std::string>& config_keys();

/// Reads a flat key-value file into settings, rejecting unknown or repeated keys.
Settings read_settings(const std::filesystem::path& path);
Settings parse_settings(const std::string& text, const std::string& origin);

/// Builds a config from settings: the mode is applied first so that its
/// defaults sit under every explicit key. Throws UsageError.
RunConfig resolve(const Settings& settings);

/// Every key with its resolved value, in config-file syntax. Feeding the
/// text back through parse_settings and resolve reproduces `config`.
std::string format_config(const RunConfig& config);

std::string to_string(ReportFormat format);

}  // namespace cartex::cli
