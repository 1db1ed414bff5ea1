#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cartex {

struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

/// Flat "key = value" text. '#' starts a comment; blank lines are ignored;
/// keys may repeat and keep their file order.
std::vector<KeyValue> parse_key_values(const std::string& text, const std::string& origin = "<text>");
std::vector<KeyValue> read_key_values(const std::filesystem::path& path);

/// Whitespace-separated numeric fields of a value.
std::vector<double> parse_numbers(const std::string& value);

}  // namespace cartex
