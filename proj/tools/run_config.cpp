#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "cartex/keyvalue.hpp"

namespace cartex::cli {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || value.empty()) {
        throw UsageError(key + ": expected a number, got '" + value + "'");
    }
    return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
    long long out = 0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || value.empty()) {
        throw UsageError(key + ": expected an integer, got '" + value + "'");
    }
    return out;
}

int parse_int(const std::string& key, const std::string& value) {
    const long long v = parse_integer(key, value);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw UsageError(key + ": out of range");
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "off" || value == "no") return false;
    throw UsageError(key + ": expected true or false, got '" + value + "'");
}

ReportFormat parse_report(const std::string& value) {
    if (value == "text") return ReportFormat::text;
    if (value == "json") return ReportFormat::json;
    if (value == "both") return ReportFormat::both;
    throw UsageError("report: expected text, json or both, got '" + value + "'");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Key {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename Field>
Key double_key(std::string name, Field field) {
    return {name, [name, field](RunConfig& c, const std::string& v) { field(c) = parse_double(name, v); },
            [field](const RunConfig& c) { return format_double(field(c)); }};
}

template <typename Field>
Key int_key(std::string name, Field field) {
    return {name, [name, field](RunConfig& c, const std::string& v) { field(c) = parse_int(name, v); },
            [field](const RunConfig& c) { return std::to_string(field(c)); }};
}

template <typename Field>
Key bool_key(std::string name, Field field) {
    return {name, [name, field](RunConfig& c, const std::string& v) { field(c) = parse_bool(name, v); },
            [field](const RunConfig& c) { return std::string(field(c) ? "true" : "false"); }};
}

template <typename Field>
Key path_key(std::string name, Field field) {
    return {name, [field](RunConfig& c, const std::string& v) { field(c) = v; },
            [field](const RunConfig& c) { return field(c).string(); }};
}

// Order is the order of format_config. "mode" lives outside the table since
// it selects the defaults the other keys override.
const std::vector<Key>& key_table() {
    static const std::vector<Key> keys = {
        path_key("input", [](auto& c) -> auto& { return c.input; }),
        path_key("mask", [](auto& c) -> auto& { return c.mask; }),
        path_key("truth", [](auto& c) -> auto& { return c.truth; }),
        path_key("out", [](auto& c) -> auto& { return c.out; }),
        {"seed",
         [](RunConfig& c, const std::string& v) {
             const long long s = parse_integer("seed", v);
             if (s < 0) throw UsageError("seed: must be non-negative");
             c.seed = static_cast<std::uint64_t>(s);
         },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        double_key("add-noise", [](auto& c) -> auto& { return c.add_noise; }),
        double_key("missing", [](auto& c) -> auto& { return c.missing; }),
        double_key("beta1", [](auto& c) -> auto& { return c.options.solver.beta1; }),
        double_key("beta2", [](auto& c) -> auto& { return c.options.solver.beta2; }),
        double_key("eta1", [](auto& c) -> auto& { return c.options.solver.eta1; }),
        double_key("eta2", [](auto& c) -> auto& { return c.options.solver.eta2; }),
        double_key("gamma", [](auto& c) -> auto& { return c.options.solver.gamma; }),
        double_key("delta", [](auto& c) -> auto& { return c.options.solver.delta; }),
        int_key("iters", [](auto& c) -> auto& { return c.options.solver.iterations; }),
        int_key("lambda-refresh", [](auto& c) -> auto& { return c.options.solver.lambda_refresh; }),
        double_key("cg-tol", [](auto& c) -> auto& { return c.options.solver.cg_tol; }),
        int_key("cg-maxit", [](auto& c) -> auto& { return c.options.solver.cg_maxit; }),
        int_key("outer-limit", [](auto& c) -> auto& { return c.options.solver.outer_limit; }),
        double_key("constraint-tol", [](auto& c) -> auto& { return c.options.solver.constraint_tol; }),
        int_key("window", [](auto& c) -> auto& { return c.options.graph.window; }),
        int_key("directions", [](auto& c) -> auto& { return c.options.graph.directions; }),
        int_key("knn", [](auto& c) -> auto& { return c.options.graph.knn; }),
        double_key("h", [](auto& c) -> auto& { return c.options.graph.h; }),
        int_key("patch", [](auto& c) -> auto& { return c.options.graph.patch; }),
        int_key("band", [](auto& c) -> auto& { return c.options.graph.band_halfwidth; }),
        bool_key("isotropic", [](auto& c) -> auto& { return c.options.graph.isotropic; }),
        int_key("union-knn", [](auto& c) -> auto& { return c.options.graph.union_knn; }),
        double_key("sigma", [](auto& c) -> auto& { return c.options.sigma; }),
        int_key("nlm-patch", [](auto& c) -> auto& { return c.options.nlm.patch; }),
        int_key("nlm-search", [](auto& c) -> auto& { return c.options.nlm.search; }),
        double_key("nlm-scale", [](auto& c) -> auto& { return c.options.nlm.filter_scale; }),
        {"report", [](RunConfig& c, const std::string& v) { c.report = parse_report(v); },
         [](const RunConfig& c) { return to_string(c.report); }},
        bool_key("dump-graph", [](auto& c) -> auto& { return c.dump_graph; }),
        {"log-level",
         [](RunConfig& c, const std::string& v) {
             if (v != "error" && v != "warn" && v != "info" && v != "debug") {
                 throw UsageError("log-level: expected error, warn, info or debug, got '" + v + "'");
             }
             c.log_level = v;
         },
         [](const RunConfig& c) { return c.log_level; }},
    };
    return keys;
}

void validate(const RunConfig& c) {
    try {
        c.options.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto& g = c.options.graph;
    if (g.window < 3 || g.window % 2 == 0) throw UsageError("window: must be odd and >= 3");
    if (g.directions < 1) throw UsageError("directions: must be >= 1");
    if (g.knn < 1) throw UsageError("knn: must be >= 1");
    if (!(g.h > 0.0)) throw UsageError("h: must be positive");
    if (g.patch < 1 || g.patch % 2 == 0) throw UsageError("patch: must be odd and >= 1");
    if (g.band_halfwidth < 0) throw UsageError("band: must be non-negative");
    if (g.union_knn < 0) throw UsageError("union-knn: must be non-negative");
    if (!(c.options.sigma >= 0.0)) throw UsageError("sigma: must be non-negative");
    if (!(c.add_noise >= 0.0)) throw UsageError("add-noise: must be non-negative");
    if (!(c.missing >= 0.0 && c.missing <= 0.7)) throw UsageError("missing: must lie in [0, 0.7]");
}

}  // namespace

std::string to_string(ReportFormat format) {
    switch (format) {
        case ReportFormat::text: return "text";
        case ReportFormat::json: return "json";
        case ReportFormat::both: return "both";
    }
    return "both";
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out{"mode"};
        for (const auto& k : key_table()) out.push_back(k.name);
        return out;
    }();
    return names;
}

Settings parse_settings(const std::string& text, const std::string& origin) {
    std::vector<KeyValue> entries;
    try {
        entries = parse_key_values(text, origin);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto& known = config_keys();
    Settings out;
    for (const auto& kv : entries) {
        const std::string where = origin + ":" + std::to_string(kv.line);
        if (std::find(known.begin(), known.end(), kv.key) == known.end()) {
            throw UsageError(where + ": unknown key '" + kv.key + "'");
        }
        if (!out.emplace(kv.key, kv.value).second) throw UsageError(where + ": repeated key '" + kv.key + "'");
    }
    return out;
}

Settings read_settings(const std::filesystem::path& path) {
    std::ostringstream text;
    {
        std::ifstream in(path);
        if (!in) throw UsageError(path.string() + ": cannot open config file");
        text << in.rdbuf();
    }
    return parse_settings(text.str(), path.string());
}

RunConfig resolve(const Settings& settings) {
    const auto& known = config_keys();
    for (const auto& [key, value] : settings) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw UsageError("unknown key '" + key + "'");
        }
    }
    RunConfig c;
    if (const auto it = settings.find("mode"); it != settings.end()) {
        try {
            c.mode = parse_mode(it->second);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    c.options.solver = SolverParams::defaults_for(c.mode);
    for (const auto& k : key_table()) {
        if (const auto it = settings.find(k.name); it != settings.end()) k.set(c, it->second);
    }
    validate(c);
    return c;
}

std::string format_config(const RunConfig& config) {
    std::ostringstream out;
    out << "mode = " << to_string(config.mode) << '\n';
    for (const auto& k : key_table()) out << k.name << " = " << k.get(config) << '\n';
    return out.str();
}

}  // namespace cartex::cli
