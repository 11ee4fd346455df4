#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

#include "steinquad/errors.hpp"

namespace steinquad {

// shortest decimal that round-trips the exact double
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double_exact(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("bad floating-point literal: " + s);
    return v;
}

}  // namespace steinquad
