#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nxwlan/frame.hpp"

namespace nxwlan {

// Wire layout for tagged frames (big-endian, byte offsets):
//
//   [0]      kind code (beacon=1, probe_request=2, probe_response=3, auth_request=4,
//            auth_response=5, assoc_request=6, assoc_response=7, ack=8, data=9)
//   [1]      flag bits: bit0 retry, bit1 protected, bit2 injected, bit3 tx_status
//   [2..8]   addr1
//   [8..14]  addr2
//   [14..20] addr3
//   [20..22] seq, low 12 bits (high nibble must be zero)
//   [22]     rssi, signed dBm
//   [23]     phy rate index 0-7 into {6,9,12,18,24,36,48,54} Mbit/s
//   [24]     tx power, signed dBm
//   [25..27] payload length
//   [27..]   payload
//
// Decoding is strict: only the canonical encoding of a valid frame is accepted,
// so encode is injective and decode(encode(tf)) == tf.

inline constexpr std::size_t kFrameHeaderSize = 27;

struct DecodeError {
    std::size_t offset = 0;
    std::string reason;

    bool operator==(const DecodeError&) const = default;
};

using DecodeResult = std::variant<TaggedFrame, DecodeError>;

inline bool decode_ok(const DecodeResult& r) { return std::holds_alternative<TaggedFrame>(r); }
inline const TaggedFrame& decoded_frame(const DecodeResult& r) { return std::get<TaggedFrame>(r); }
inline const DecodeError& decode_error(const DecodeResult& r) { return std::get<DecodeError>(r); }

/// Canonical byte encoding. Throws InvariantViolation if tf violates a type invariant.
inline std::vector<std::uint8_t> encode(const TaggedFrame& tf) {
    validate(tf);
    std::vector<std::uint8_t> out;
    out.reserve(kFrameHeaderSize + tf.frame.payload.size());
    const auto& f = tf.frame;
    out.push_back(static_cast<std::uint8_t>(f.kind));
    std::uint8_t flags = 0;
    if (f.retry) flags |= 1u << 0;
    if (f.protected_frame) flags |= 1u << 1;
    if (tf.meta.injected) flags |= 1u << 2;
    if (tf.meta.tx_status) flags |= 1u << 3;
    out.push_back(flags);
    for (const auto* a : {&f.addr1, &f.addr2, &f.addr3})
        out.insert(out.end(), a->bytes.begin(), a->bytes.end());
    out.push_back(static_cast<std::uint8_t>(f.seq >> 8));
    out.push_back(static_cast<std::uint8_t>(f.seq & 0xff));
    out.push_back(static_cast<std::uint8_t>(tf.meta.rssi_dbm));
    out.push_back(*phy_rate_index(tf.meta.phy_rate_mbps));
    out.push_back(static_cast<std::uint8_t>(tf.meta.tx_power_dbm));
    out.push_back(static_cast<std::uint8_t>(f.payload.size() >> 8));
    out.push_back(static_cast<std::uint8_t>(f.payload.size() & 0xff));
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    return out;
}

/// Total function over arbitrary bytes: the unique frame whose encoding equals
/// the input, or a DecodeError with the offending offset.
inline DecodeResult decode(std::span<const std::uint8_t> in) {
    if (in.size() < kFrameHeaderSize)
        return DecodeError{in.size(), "truncated header"};
    if (!frame_kind_valid(in[0])) return DecodeError{0, "unknown kind code"};
    if (in[1] & ~0x0fu) return DecodeError{1, "reserved flag bits set"};
    if (in[20] & 0xf0u) return DecodeError{20, "seq exceeds 12 bits"};
    if (in[23] >= kPhyRatesMbps.size()) return DecodeError{23, "phy rate index out of range"};

    TaggedFrame tf;
    auto& f = tf.frame;
    f.kind = static_cast<FrameKind>(in[0]);
    f.retry = in[1] & 1u << 0;
    f.protected_frame = in[1] & 1u << 1;
    tf.meta.injected = in[1] & 1u << 2;
    tf.meta.tx_status = in[1] & 1u << 3;
    auto copy_mac = [&](std::size_t off) {
        MacAddr m;
        for (int i = 0; i < 6; ++i) m.bytes[i] = in[off + i];
        return m;
    };
    f.addr1 = copy_mac(2);
    f.addr2 = copy_mac(8);
    f.addr3 = copy_mac(14);
    f.seq = static_cast<std::uint16_t>(in[20] << 8 | in[21]);
    tf.meta.rssi_dbm = static_cast<std::int8_t>(in[22]);
    tf.meta.phy_rate_mbps = kPhyRatesMbps[in[23]];
    tf.meta.tx_power_dbm = static_cast<std::int8_t>(in[24]);
    const std::size_t payload_len = static_cast<std::size_t>(in[25]) << 8 | in[26];
    if (in.size() != kFrameHeaderSize + payload_len)
        return DecodeError{kFrameHeaderSize, "payload length mismatch"};
    f.payload.assign(in.begin() + kFrameHeaderSize, in.end());

    // Reject encodings of invalid frames so decoding stays canonical.
    if (f.kind == FrameKind::Ack && (!f.addr2.is_zero() || !f.addr3.is_zero()))
        return DecodeError{8, "ack carries addr1 only"};
    if (f.kind == FrameKind::Ack && payload_len != 0)
        return DecodeError{kFrameHeaderSize, "ack with payload"};
    if (f.protected_frame && f.kind != FrameKind::Data)
        return DecodeError{1, "protected flag on non-data frame"};
    if (tf.meta.tx_status && !tf.meta.injected)
        return DecodeError{1, "tx_status without injected"};
    return tf;
}

} // namespace nxwlan
