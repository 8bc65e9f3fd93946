#pragma once

#include <charconv>
#include <string>

namespace chemostat {

// Shortest decimal form that parses back to exactly the same double; keeps
// every serialized number both reproducible and lossless.
inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace chemostat
