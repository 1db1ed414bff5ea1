#include "cartex/keyvalue.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cartex {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<KeyValue> parse_key_values(const std::string& text, const std::string& origin) {
    std::vector<KeyValue> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": expected 'key = value'");
        }
        KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
        if (kv.key.empty()) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        out.push_back(std::move(kv));
    }
    return out;
}

std::vector<KeyValue> read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str(), path.string());
}

std::vector<double> parse_numbers(const std::string& value) {
    std::istringstream in(value);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw std::invalid_argument("not a number: '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace cartex
