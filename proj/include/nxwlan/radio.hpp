#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nxwlan/errors.hpp"
#include "nxwlan/mac.hpp"
#include "nxwlan/steering.hpp"

namespace nxwlan {

inline constexpr std::uint64_t kSifsUs = 10;

struct Vec2 {
    double x = 0;
    double y = 0;

    bool operator==(const Vec2&) const = default;
};

inline double distance(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Log-distance path loss: PL(d) = pl0 + 10*n*log10(d/d0).
struct PathLossModel {
    double pl0_db = 40.0;
    double d0_m = 1.0;
    double exponent = 3.5;
    double sensitivity_dbm = -82.0;

    void validate() const {
        if (!(exponent > 0)) throw DomainError("path loss: exponent must be > 0");
        if (!(d0_m > 0)) throw DomainError("path loss: d0 must be > 0");
    }
};

inline double path_loss(const PathLossModel& m, double d_m) {
    if (!(d_m > 0)) throw DomainError("path_loss: distance must be > 0");
    return m.pl0_db + 10.0 * m.exponent * std::log10(d_m / m.d0_m);
}

inline double rssi(double tx_dbm, const PathLossModel& m, double d_m) {
    return tx_dbm - path_loss(m, d_m);
}

// Order-independent seeded shadowing: one normal draw per (stream, link) key,
// so results do not depend on event processing order.
namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}
} // namespace detail

inline double shadow_db(double sigma_db, std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t link_key) {
    if (sigma_db == 0) return 0;
    std::uint64_t h = detail::splitmix64(seed ^ detail::splitmix64(stream ^ detail::splitmix64(link_key)));
    std::uint64_t h2 = detail::splitmix64(h);
    // Box-Muller from two uniforms in (0,1).
    double u1 = (static_cast<double>(h >> 11) + 1.0) / 9007199254740993.0;
    double u2 = (static_cast<double>(h2 >> 11) + 1.0) / 9007199254740993.0;
    return sigma_db * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// One candidate from a scan pass: a decodable probe response.
struct ProbeCandidate {
    double rssi_dbm = 0;
    MacAddr bssid;
    std::string serving;  // e.g. "rap:bob", "wtp:alice"
    int channel = 0;
};

/// Active-scan selection: strongest response above sensitivity, ties broken by
/// lowest BSSID. nullopt if nothing decodable.
inline std::optional<ProbeCandidate> choose_response(const std::vector<ProbeCandidate>& responses,
                                                     double sensitivity_dbm) {
    std::optional<ProbeCandidate> best;
    for (const auto& c : responses) {
        if (c.rssi_dbm < sensitivity_dbm) continue;
        if (!best || c.rssi_dbm > best->rssi_dbm ||
            (c.rssi_dbm == best->rssi_dbm && c.bssid < best->bssid))
            best = c;
    }
    return best;
}

/// One station in a BSS for the saturation throughput model.
struct BssMember {
    double phy_rate_mbps = 0;
    bool downlink = false;                       // consumes the DL backhaul
    std::optional<double> tunnel_ul_mbps;        // set when served via a WTP
};

/// Ground-truth per-station end-to-end rate: the wireless DCF/TXOP share capped
/// by the DL backhaul share and, for WTP-served members, the tunnel uplink —
/// the same min-cascade the steering algorithm predicts.
inline std::vector<double> bss_throughput(const std::vector<BssMember>& members,
                                          double dl_backhaul_mbps, bool txop_mode = false) {
    std::vector<double> out(members.size(), 0.0);
    if (members.empty()) return out;
    std::size_t dl_members = 0;
    for (const auto& m : members)
        if (m.downlink) ++dl_members;
    const double dl_share = dl_members ? dl_backhaul_mbps / static_cast<double>(dl_members) : 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        ClientLoad others;
        for (std::size_t j = 0; j < members.size(); ++j)
            if (j != i) others.phy_rates_mbps.push_back(members[j].phy_rate_mbps);
        double rate = mac_rate(others, members[i].phy_rate_mbps, txop_mode);
        if (members[i].downlink) {
            rate = std::min(rate, dl_share);
            if (members[i].tunnel_ul_mbps) rate = std::min(rate, *members[i].tunnel_ul_mbps);
        }
        out[i] = rate;
    }
    return out;
}

} // namespace nxwlan
