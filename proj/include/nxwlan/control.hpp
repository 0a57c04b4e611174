#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "nxwlan/dot11_switch.hpp"
#include "nxwlan/errors.hpp"
#include "nxwlan/mac.hpp"
#include "nxwlan/steering.hpp"

namespace nxwlan {

// Control-bus wire envelope (big-endian, byte offsets):
//
//   [0]     msg kind (wtp_setup_request=1, wtp_setup_complete=2, backhaul_report=3)
//   [1..3]  source EAP id
//   [3..5]  destination EAP id
//
// followed by the body:
//
//   wtp_setup_request:  [5..7] requester EAP id, [7..9] proposed tunnel endpoint,
//                       [9..15] home BSS bssid, [15] ssid length, [16..] ssid bytes.
//                       Carries the home BSS config sans keys; the message has no
//                       credential field by construction.
//   wtp_setup_complete: [5..7] tunnel endpoint (host side), [7..9] WTP port binding.
//   backhaul_report:    [5..13] available DL Mbit/s, [13..21] available UL Mbit/s
//                       (IEEE-754 bit patterns).

struct WtpSetupRequest {
    std::string requester;
    std::uint16_t tunnel_endpoint = 0;
    MacAddr vap_bssid;   // home BSS config sans keys
    std::string ssid;
};

struct WtpSetupComplete {
    std::uint16_t tunnel_endpoint = 0;
    std::uint16_t wtp_port = 0;
};

struct BackhaulReport {
    double dl_mbps = 0;
    double ul_mbps = 0;
};

using ControlBody = std::variant<WtpSetupRequest, WtpSetupComplete, BackhaulReport>;

struct ControlMsg {
    std::string from;
    std::string to;
    ControlBody body;
};

// Structural guarantee that no control message can carry key material.
template <typename T>
concept CarriesCredentials = requires(T t) { t.passphrase; } || requires(T t) { t.psk; } ||
                             requires(T t) { t.wpa_key; } || requires(T t) { t.pmk; } ||
                             requires(T t) { t.key; };
static_assert(!CarriesCredentials<WtpSetupRequest>);
static_assert(!CarriesCredentials<WtpSetupComplete>);
static_assert(!CarriesCredentials<BackhaulReport>);

namespace detail {
inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}
inline void put_f64(std::vector<std::uint8_t>& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}
inline std::uint16_t get_u16(const std::vector<std::uint8_t>& in, std::size_t off) {
    return static_cast<std::uint16_t>(in[off] << 8 | in[off + 1]);
}
inline double get_f64(const std::vector<std::uint8_t>& in, std::size_t off) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits = bits << 8 | in[off + i];
    return std::bit_cast<double>(bits);
}
} // namespace detail

/// Name <-> id mapping for the wire encoding, shared by both codec directions.
using EapIdMap = std::map<std::string, std::uint16_t>;

inline std::vector<std::uint8_t> encode_control(const ControlMsg& msg, const EapIdMap& ids) {
    std::vector<std::uint8_t> out;
    out.push_back(static_cast<std::uint8_t>(msg.body.index() + 1));
    detail::put_u16(out, ids.at(msg.from));
    detail::put_u16(out, ids.at(msg.to));
    if (const auto* req = std::get_if<WtpSetupRequest>(&msg.body)) {
        detail::put_u16(out, ids.at(req->requester));
        detail::put_u16(out, req->tunnel_endpoint);
        out.insert(out.end(), req->vap_bssid.bytes.begin(), req->vap_bssid.bytes.end());
        out.push_back(static_cast<std::uint8_t>(req->ssid.size()));
        out.insert(out.end(), req->ssid.begin(), req->ssid.end());
    } else if (const auto* c = std::get_if<WtpSetupComplete>(&msg.body)) {
        detail::put_u16(out, c->tunnel_endpoint);
        detail::put_u16(out, c->wtp_port);
    } else {
        const auto& r = std::get<BackhaulReport>(msg.body);
        detail::put_f64(out, r.dl_mbps);
        detail::put_f64(out, r.ul_mbps);
    }
    return out;
}

inline std::optional<ControlMsg> decode_control(const std::vector<std::uint8_t>& in,
                                                const EapIdMap& ids) {
    std::map<std::uint16_t, std::string> names;
    for (const auto& [name, id] : ids) names.emplace(id, name);
    if (in.size() < 5) return std::nullopt;
    auto name_of = [&](std::uint16_t id) -> std::optional<std::string> {
        auto it = names.find(id);
        if (it == names.end()) return std::nullopt;
        return it->second;
    };
    auto from = name_of(detail::get_u16(in, 1));
    auto to = name_of(detail::get_u16(in, 3));
    if (!from || !to) return std::nullopt;
    ControlMsg msg{*from, *to, {}};
    switch (in[0]) {
        case 1: {
            if (in.size() < 16) return std::nullopt;
            WtpSetupRequest req;
            auto requester = name_of(detail::get_u16(in, 5));
            if (!requester) return std::nullopt;
            req.requester = *requester;
            req.tunnel_endpoint = detail::get_u16(in, 7);
            for (int i = 0; i < 6; ++i) req.vap_bssid.bytes[i] = in[9 + i];
            const std::size_t ssid_len = in[15];
            if (in.size() != 16 + ssid_len) return std::nullopt;
            req.ssid.assign(in.begin() + 16, in.end());
            msg.body = req;
            return msg;
        }
        case 2: {
            if (in.size() != 9) return std::nullopt;
            msg.body = WtpSetupComplete{detail::get_u16(in, 5), detail::get_u16(in, 7)};
            return msg;
        }
        case 3: {
            if (in.size() != 21) return std::nullopt;
            msg.body = BackhaulReport{detail::get_f64(in, 5), detail::get_f64(in, 13)};
            return msg;
        }
        default: return std::nullopt;
    }
}

/// Requester-side view of one neighbor.
enum class NeighborPhase : std::uint8_t { Discovered, SetupRequested, Established, Silent };

inline const char* to_string(NeighborPhase p) {
    switch (p) {
        case NeighborPhase::Discovered: return "discovered";
        case NeighborPhase::SetupRequested: return "setup_requested";
        case NeighborPhase::Established: return "established";
        case NeighborPhase::Silent: return "silent";
    }
    return "?";
}

enum class SetupPolicy : std::uint8_t { Accept, Reject };

struct TimerRequest {
    std::string neighbor;
    std::uint64_t token = 0;
    std::uint64_t deadline_us = 0;
};

struct RoamTarget {
    bool rap = false;            // true: local RAP radio
    std::string neighbor;        // WTP host when rap == false
};

/// Per-EAP controller: neighbor discovery, the WTP/VAP setup handshake,
/// backhaul report caching, steering invocation and roam. One logical actor;
/// every handler runs to completion in its owning event context. Emitted
/// messages land in outbox(), timer requests in timer_requests() — the caller
/// drains both after each handler.
class EapController {
public:
    struct VapSide {               // my VAP hosted at this neighbor
        NeighborPhase phase = NeighborPhase::Discovered;
        std::uint16_t tunnel_endpoint = 0;   // my proposed endpoint id
        std::uint64_t token = 0;             // matches the response timer
        std::optional<PortId> tunnel_port;   // home-side switch port, set when Established
        std::uint16_t remote_endpoint = 0;
        std::uint64_t established_at_us = 0;
    };

    struct HostSide {              // I host this neighbor's VAP on a local WTP
        PortId wtp_radio_port;
        PortId tunnel_port;
        std::uint16_t tunnel_endpoint = 0;   // my endpoint id
        std::uint16_t remote_endpoint = 0;
        MacAddr vap_bssid;
        std::string ssid;
        ControlMsg last_complete;
    };

    EapController(std::string name, Dot11Switch& sw, SetupPolicy policy,
                  BackhaulCaps backhaul, SteeringParams steering, MacAddr rap_bssid,
                  MacAddr vap_bssid, std::string ssid, std::uint64_t control_rtt_us)
        : name_(std::move(name)),
          sw_(sw),
          policy_(policy),
          backhaul_(backhaul),
          steering_(std::move(steering)),
          rap_bssid_(rap_bssid),
          vap_bssid_(vap_bssid),
          ssid_(std::move(ssid)),
          setup_timeout_us_(3 * control_rtt_us) {
        rap_port_ = sw_.add_port(PortRole::RapRadio);
        vap_port_ = sw_.add_port(PortRole::VapAttach);
        lan_port_ = sw_.add_port(PortRole::Lan);
    }

    const std::string& name() const { return name_; }
    PortId rap_port() const { return rap_port_; }
    PortId vap_port() const { return vap_port_; }
    PortId lan_port() const { return lan_port_; }
    const MacAddr& rap_bssid() const { return rap_bssid_; }
    const MacAddr& vap_bssid() const { return vap_bssid_; }
    const std::string& ssid() const { return ssid_; }

    std::vector<ControlMsg>& outbox() { return outbox_; }
    std::vector<TimerRequest>& timer_requests() { return timer_requests_; }
    int unexpected_msgs() const { return unexpected_msgs_; }

    std::optional<NeighborPhase> phase(const std::string& neighbor) const {
        auto it = vap_at_.find(neighbor);
        if (it == vap_at_.end()) return std::nullopt;
        return it->second.phase;
    }
    const std::map<std::string, VapSide>& vap_sides() const { return vap_at_; }
    const std::map<std::string, HostSide>& host_sides() const { return hosting_; }
    const std::map<std::string, BackhaulCaps>& cached_reports() const { return reports_; }

    /// Discovery event for a neighbor (from the scenario adjacency). Idempotent
    /// while a handshake is pending or complete; a Silent neighbor is retried.
    void on_discovery(const std::string& neighbor, std::uint64_t now_us) {
        if (neighbor == name_) return;
        auto& side = vap_at_[neighbor];
        if (side.phase == NeighborPhase::SetupRequested ||
            side.phase == NeighborPhase::Established)
            return;
        side.phase = NeighborPhase::SetupRequested;
        side.tunnel_endpoint = next_tunnel_endpoint_++;
        side.token = next_timer_token_++;
        outbox_.push_back(
            {name_, neighbor, WtpSetupRequest{name_, side.tunnel_endpoint, vap_bssid_, ssid_}});
        timer_requests_.push_back({neighbor, side.token, now_us + setup_timeout_us_});
    }

    /// Host side of the handshake. Accepting creates the WTP (radio + tunnel
    /// ports) and the static rules, then confirms; rejection stays silent.
    void on_setup_request(const ControlMsg& env, const WtpSetupRequest& req) {
        if (policy_ == SetupPolicy::Reject) return;
        auto it = hosting_.find(req.requester);
        if (it != hosting_.end()) {
            // Duplicate while established: re-send the last confirmation so the
            // handshake is idempotent under control-bus retries.
            it->second.remote_endpoint = req.tunnel_endpoint;
            outbox_.push_back(it->second.last_complete);
            return;
        }
        HostSide host;
        host.vap_bssid = req.vap_bssid;
        host.ssid = req.ssid;
        host.remote_endpoint = req.tunnel_endpoint;
        host.tunnel_endpoint = next_tunnel_endpoint_++;
        const int peer = next_peer_tag_++;
        host.wtp_radio_port = sw_.add_port(PortRole::WtpRadio, peer);
        host.tunnel_port = sw_.add_port(PortRole::Tunnel, peer);
        // Probe requests sniffed by the WTP fan into the tunnel toward the VAP.
        sw_.install_broadcast({host.wtp_radio_port, std::nullopt,
                               MulticastGroup{next_group_id_++, {host.tunnel_port.id}}});
        // Uplink frames addressed to the VAP's BSSID head home.
        sw_.install_unicast({host.wtp_radio_port, req.vap_bssid, host.tunnel_port});
        // Tunneled broadcast frames (beacons) go out the WTP radio.
        sw_.install_broadcast({host.tunnel_port, req.vap_bssid,
                               MulticastGroup{next_group_id_++, {host.wtp_radio_port.id}}});
        host.last_complete = {name_, env.from,
                              WtpSetupComplete{host.tunnel_endpoint, host.wtp_radio_port.id}};
        hosting_.emplace(req.requester, host);
        outbox_.push_back(host.last_complete);
    }

    /// Requester side completion: bind the tunnel, open the home-side port and
    /// uplink rule, and start tunneling beacons.
    void on_setup_complete(const ControlMsg& env, const WtpSetupComplete& msg,
                           std::uint64_t now_us) {
        auto it = vap_at_.find(env.from);
        if (it == vap_at_.end() || it->second.phase != NeighborPhase::SetupRequested) {
            ++unexpected_msgs_;
            return;
        }
        auto& side = it->second;
        side.phase = NeighborPhase::Established;
        side.remote_endpoint = msg.tunnel_endpoint;
        side.established_at_us = now_us;
        side.tunnel_port = sw_.add_port(PortRole::Tunnel, next_peer_tag_++);
        sw_.install_unicast({*side.tunnel_port, vap_bssid_, vap_port_});
        // Tunneled probe requests (any source, clients may randomize) fan into the VAP.
        sw_.install_broadcast({*side.tunnel_port, std::nullopt,
                               MulticastGroup{next_group_id_++, {vap_port_.id}}});
        refresh_beacon_group();
    }

    /// Response timer for a pending setup request. Rejection is silence, so the
    /// requester concludes on its own.
    void on_timeout(const std::string& neighbor, std::uint64_t token) {
        auto it = vap_at_.find(neighbor);
        if (it == vap_at_.end()) return;
        if (it->second.phase == NeighborPhase::SetupRequested && it->second.token == token)
            it->second.phase = NeighborPhase::Silent;
    }

    void on_backhaul_report(const std::string& from, const BackhaulReport& report) {
        if (!hosting_.count(from)) {
            ++unexpected_msgs_;
            return;
        }
        reports_[from] = {report.dl_mbps, report.ul_mbps};
    }

    /// Periodic advertisement of this EAP's available backhaul to every host of
    /// its VAP (they need it to steer clients our way).
    void emit_backhaul_reports() {
        for (const auto& [neighbor, side] : vap_at_)
            if (side.phase == NeighborPhase::Established)
                outbox_.push_back(
                    {name_, neighbor, BackhaulReport{backhaul_.dl_mbps, backhaul_.ul_mbps}});
    }

    /// Steering entry point: runs the TX-power calculation over the local load
    /// and the cached neighbor reports, and pre-installs the host-side downlink
    /// rule so tunneled responses for this station reach the WTP radio.
    SteeringDecision on_probe_request(const MacAddr& sta, double prx_dbm,
                                      const ClientLoad& local_load) {
        std::map<std::string, BackhaulCaps> neighbor_caps;
        for (const auto& [owner, host] : hosting_) {
            auto rep = reports_.find(owner);
            if (rep != reports_.end()) neighbor_caps.emplace(owner, rep->second);
        }
        auto decision =
            calc_probe_response_tx_powers(steering_, prx_dbm, local_load, backhaul_, neighbor_caps);
        // An out-of-range client (predicted rate 0) gets no response scheduled:
        // without the downlink rule the tunneled response dies in the switch.
        if (decision.predicted_phy_mbps > 0)
            for (const auto& [owner, host] : hosting_)
                if (decision.vaps.count(owner))
                    sw_.install_unicast({host.tunnel_port, sta, host.wtp_radio_port});
        return decision;
    }

    /// Installs the data-path rules once a station finishes associating.
    void on_association(const MacAddr& sta, const RoamTarget& target) {
        apply_target_rules(sta, target);
        served_[sta] = target;
    }

    void on_disassociation(const MacAddr& sta) {
        auto it = served_.find(sta);
        if (it == served_.end()) return;
        sw_.remove_unicast(lan_port_, sta);
        sw_.remove_unicast(vap_port_, sta);
        served_.erase(it);
    }

    /// Moves a served station between the RAP and WTPs by rewriting the rule
    /// pair in one event, so no frame observes a half-moved station.
    void roam(const MacAddr& sta, const RoamTarget& target) {
        auto it = served_.find(sta);
        if (it == served_.end()) throw UnknownSta("roam: " + sta.to_string());
        if (it->second.rap == target.rap && it->second.neighbor == target.neighbor) return;
        apply_target_rules(sta, target);
        it->second = target;
    }

    const std::map<MacAddr, RoamTarget>& served() const { return served_; }

private:
    void apply_target_rules(const MacAddr& sta, const RoamTarget& target) {
        if (target.rap) {
            sw_.install_unicast({lan_port_, sta, rap_port_});
            sw_.remove_unicast(vap_port_, sta);
        } else {
            auto it = vap_at_.find(target.neighbor);
            if (it == vap_at_.end() || it->second.phase != NeighborPhase::Established ||
                !it->second.tunnel_port)
                throw UnknownSta("roam target not established: " + target.neighbor);
            sw_.install_unicast({lan_port_, sta, vap_port_});
            sw_.install_unicast({vap_port_, sta, *it->second.tunnel_port});
        }
    }

    void refresh_beacon_group() {
        std::set<std::uint16_t> tunnels;
        for (const auto& [_, side] : vap_at_)
            if (side.phase == NeighborPhase::Established && side.tunnel_port)
                tunnels.insert(side.tunnel_port->id);
        if (tunnels.empty()) return;
        if (beacon_group_id_ == 0) beacon_group_id_ = next_group_id_++;
        sw_.install_broadcast(
            {vap_port_, vap_bssid_, MulticastGroup{beacon_group_id_, tunnels}});
    }

    std::string name_;
    Dot11Switch& sw_;
    SetupPolicy policy_;
    BackhaulCaps backhaul_;
    SteeringParams steering_;
    MacAddr rap_bssid_;
    MacAddr vap_bssid_;
    std::string ssid_;
    std::uint64_t setup_timeout_us_;

    PortId rap_port_, vap_port_, lan_port_;
    std::map<std::string, VapSide> vap_at_;
    std::map<std::string, HostSide> hosting_;
    std::map<std::string, BackhaulCaps> reports_;
    std::map<MacAddr, RoamTarget> served_;
    std::vector<ControlMsg> outbox_;
    std::vector<TimerRequest> timer_requests_;
    std::uint16_t next_tunnel_endpoint_ = 1;
    std::uint64_t next_timer_token_ = 1;
    int next_peer_tag_ = 1;
    int next_group_id_ = 1;
    int beacon_group_id_ = 0;
    int unexpected_msgs_ = 0;
};

} // namespace nxwlan
