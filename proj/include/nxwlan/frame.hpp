#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "nxwlan/errors.hpp"
#include "nxwlan/mac.hpp"

namespace nxwlan {

/// The nine frame kinds the architecture exchanges. Closed set: the simulator
/// generates all traffic itself, unknown subtypes are a decode error.
enum class FrameKind : std::uint8_t {
    Beacon = 1,
    ProbeRequest = 2,
    ProbeResponse = 3,
    AuthRequest = 4,
    AuthResponse = 5,
    AssocRequest = 6,
    AssocResponse = 7,
    Ack = 8,
    Data = 9,
};

inline bool frame_kind_valid(std::uint8_t code) { return code >= 1 && code <= 9; }

inline const char* to_string(FrameKind k) {
    switch (k) {
        case FrameKind::Beacon: return "beacon";
        case FrameKind::ProbeRequest: return "probe_request";
        case FrameKind::ProbeResponse: return "probe_response";
        case FrameKind::AuthRequest: return "auth_request";
        case FrameKind::AuthResponse: return "auth_response";
        case FrameKind::AssocRequest: return "assoc_request";
        case FrameKind::AssocResponse: return "assoc_response";
        case FrameKind::Ack: return "ack";
        case FrameKind::Data: return "data";
    }
    return "?";
}

/// 802.11a PHY rate set, Mbit/s. Wire codec stores an index into this table.
inline constexpr std::array<double, 8> kPhyRatesMbps{6, 9, 12, 18, 24, 36, 48, 54};

inline std::optional<std::uint8_t> phy_rate_index(double mbps) {
    for (std::uint8_t i = 0; i < kPhyRatesMbps.size(); ++i)
        if (kPhyRatesMbps[i] == mbps) return i;
    return std::nullopt;
}

/// Parsed 802.11 frame. Payload is opaque (ciphertext for protected data frames).
struct Dot11Frame {
    FrameKind kind = FrameKind::Data;
    MacAddr addr1;              // receiver / destination
    MacAddr addr2;              // transmitter / source
    MacAddr addr3;              // BSSID
    std::uint16_t seq = 0;      // 12-bit, wraps mod 4096
    bool retry = false;
    bool protected_frame = false;  // true only for Data
    std::vector<std::uint8_t> payload;

    bool operator==(const Dot11Frame&) const = default;
};

/// Radio metadata accompanying a frame. rssi/tx_power are integer dBm as
/// carried on the wire; the radio environment keeps full precision internally.
struct RadioMeta {
    std::int8_t rssi_dbm = 0;        // receive path
    double phy_rate_mbps = 6;        // one of kPhyRatesMbps
    std::int8_t tx_power_dbm = 0;    // transmit path
    bool injected = false;           // entered via monitor-style injection
    bool tx_status = false;          // reports a completed injected transmission

    bool operator==(const RadioMeta&) const = default;
};

/// The unit carried on tunnels and switch ports.
struct TaggedFrame {
    Dot11Frame frame;
    RadioMeta meta;

    bool operator==(const TaggedFrame&) const = default;
};

/// Checks all type invariants; throws InvariantViolation naming the first failure.
inline void validate(const TaggedFrame& tf) {
    const auto& f = tf.frame;
    if (!frame_kind_valid(static_cast<std::uint8_t>(f.kind)))
        throw InvariantViolation("frame: invalid kind");
    if (f.kind == FrameKind::Ack) {
        if (!f.addr2.is_zero() || !f.addr3.is_zero())
            throw InvariantViolation("frame: ack carries addr1 only");
        if (!f.payload.empty()) throw InvariantViolation("frame: ack with payload");
    }
    if (f.protected_frame && f.kind != FrameKind::Data)
        throw InvariantViolation("frame: protected flag on non-data frame");
    if (f.seq > 0x0fff) throw InvariantViolation("frame: seq exceeds 12 bits");
    if (f.payload.size() > 0xffff) throw InvariantViolation("frame: payload too long");
    if (tf.meta.tx_status && !tf.meta.injected)
        throw InvariantViolation("meta: tx_status without injected");
    if (!phy_rate_index(tf.meta.phy_rate_mbps))
        throw InvariantViolation("meta: phy rate not in 802.11a set");
}

inline TaggedFrame make_ack(const MacAddr& transmitter_of_acked) {
    TaggedFrame tf;
    tf.frame.kind = FrameKind::Ack;
    tf.frame.addr1 = transmitter_of_acked;
    return tf;
}

} // namespace nxwlan
