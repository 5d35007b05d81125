#pragma once

// Small helpers shared by the CSV readers/writers. Not part of the public API.

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "prosim/profiles.hpp"

namespace prosim::detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\xEF' ||
                          s.front() == '\xBB' || s.front() == '\xBF'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    while (true) {
        auto pos = line.find(sep, begin);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(begin)));
            return out;
        }
        out.push_back(trim(line.substr(begin, pos - begin)));
        begin = pos + 1;
    }
}

inline bool parse_double(std::string_view s, double& value) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline double parse_double_or_throw(std::string_view s, std::size_t line, std::string_view what) {
    double v = 0.0;
    if (!parse_double(s, v))
        throw DataError("line " + std::to_string(line) + ": cannot parse " + std::string(what) + " '" +
                        std::string(s) + "'");
    return v;
}

// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace prosim::detail
