#pragma once

#include <charconv>
#include <string>

namespace pcstage {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

} // namespace pcstage
