#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

#include "tdqn/error.hpp"

namespace tdqn {

// Shortest decimal form that parses back to the identical double. Text files
// written this way survive a read/write cycle bit for bit.
inline std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    TDQN_INVARIANT(ec == std::errc{}, "to_chars failed");
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view text, std::string_view what = "number") {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        fail("bad ", what, ": '", std::string(text), "'");
    return value;
}

inline std::int64_t parse_int(std::string_view text, std::string_view what = "integer") {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        fail("bad ", what, ": '", std::string(text), "'");
    return value;
}

// FNV-1a over raw bytes; used to fingerprint input data in run manifests.
inline std::uint64_t fnv1a64(const void* bytes, std::size_t count, std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < count; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t value) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
        value >>= 4;
    }
    return out;
}

}  // namespace tdqn
