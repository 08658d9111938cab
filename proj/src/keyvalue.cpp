#include "irmatch/keyvalue.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "irmatch/error.hpp"

namespace irmatch {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
    KeyValues out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw FormatError("line " + std::to_string(line_no) + ": expected key = value");
        }
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (key.empty()) {
            throw FormatError("line " + std::to_string(line_no) + ": empty key");
        }
        out.emplace_back(std::string(key), std::string(value));
    }
    return out;
}

bool parse_bool_value(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw FormatError("'" + std::string(key) + "' expects a boolean, got '" + std::string(value) +
                      "'");
}

long long parse_int_value(std::string_view key, std::string_view value) {
    long long out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw FormatError("'" + std::string(key) + "' expects an integer, got '" +
                          std::string(value) + "'");
    }
    return out;
}

double parse_real_value(std::string_view key, std::string_view value) {
    const std::string copy(value);
    char* end = nullptr;
    const double out = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size()) {
        throw FormatError("'" + std::string(key) + "' expects a number, got '" + copy + "'");
    }
    return out;
}

std::vector<std::string> parse_list_value(std::string_view value) {
    std::vector<std::string> out;
    while (true) {
        const auto comma = value.find(',');
        auto item = trim(value.substr(0, comma));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        value = value.substr(comma + 1);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace irmatch
