#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>

#include "nxwlan/errors.hpp"

namespace nxwlan {

/// 48-bit MAC address, value type.
struct MacAddr {
    std::array<std::uint8_t, 6> bytes{};

    auto operator<=>(const MacAddr&) const = default;

    static MacAddr broadcast() { return MacAddr{{0xff, 0xff, 0xff, 0xff, 0xff, 0xff}}; }

    bool is_broadcast() const { return *this == broadcast(); }
    bool is_zero() const { return *this == MacAddr{}; }

    std::string to_string() const {
        char buf[18];
        std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", bytes[0], bytes[1],
                      bytes[2], bytes[3], bytes[4], bytes[5]);
        return buf;
    }

    /// Parses "aa:bb:cc:dd:ee:ff" (case-insensitive). Throws DomainError on malformed input.
    static MacAddr parse(const std::string& s) {
        MacAddr m;
        if (s.size() != 17) throw DomainError("MacAddr::parse: bad length: " + s);
        for (int i = 0; i < 6; ++i) {
            if (i > 0 && s[i * 3 - 1] != ':') throw DomainError("MacAddr::parse: bad separator: " + s);
            auto nib = [&](char c) -> int {
                if (c >= '0' && c <= '9') return c - '0';
                if (c >= 'a' && c <= 'f') return c - 'a' + 10;
                if (c >= 'A' && c <= 'F') return c - 'A' + 10;
                throw DomainError("MacAddr::parse: bad hex digit: " + s);
            };
            m.bytes[i] = static_cast<std::uint8_t>(nib(s[i * 3]) << 4 | nib(s[i * 3 + 1]));
        }
        return m;
    }
};

} // namespace nxwlan

template <>
struct std::hash<nxwlan::MacAddr> {
    std::size_t operator()(const nxwlan::MacAddr& m) const noexcept {
        std::uint64_t v = 0;
        for (auto b : m.bytes) v = v << 8 | b;
        return std::hash<std::uint64_t>{}(v);
    }
};
