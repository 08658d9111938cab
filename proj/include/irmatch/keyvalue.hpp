#pragma once

// Minimal `key = value` configuration files: one pair per line, '#' starts a
// comment, surrounding whitespace and optional double quotes are trimmed.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace irmatch {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(std::string_view text);

bool parse_bool_value(std::string_view key, std::string_view value);
long long parse_int_value(std::string_view key, std::string_view value);
double parse_real_value(std::string_view key, std::string_view value);
/// Comma-separated list; empty items are skipped.
std::vector<std::string> parse_list_value(std::string_view value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace irmatch
