#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace marsnet {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

/// Fixed-point rendering, used for human-facing tables.
inline std::string format_fixed(double v, int decimals) {
    if (!std::isfinite(v)) return format_double(v);
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    (void)ec;
    return std::string(buf, end);
}

}  // namespace marsnet
