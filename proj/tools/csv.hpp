#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace lrg::cli {

/// RFC-4180 field quoting: fields with commas, quotes or line breaks are
/// wrapped in double quotes with embedded quotes doubled.
inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (const char ch : field) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

/// Shortest round-trip decimal formatting, locale-independent.
inline std::string csv_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

inline std::string csv_number(std::optional<double> value) {
    return value ? csv_number(*value) : std::string{};
}

inline std::string csv_join(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csv_escape(fields[i]);
    }
    line += "\r\n";
    return line;
}

}  // namespace lrg::cli
