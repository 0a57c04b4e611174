#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nxwlan/errors.hpp"
#include "nxwlan/frame.hpp"

namespace nxwlan {

enum class PortRole : std::uint8_t { RapRadio, VapAttach, WtpRadio, Tunnel, Lan };

inline const char* to_string(PortRole r) {
    switch (r) {
        case PortRole::RapRadio: return "rap_radio";
        case PortRole::VapAttach: return "vap_attach";
        case PortRole::WtpRadio: return "wtp_radio";
        case PortRole::Tunnel: return "tunnel";
        case PortRole::Lan: return "lan";
    }
    return "?";
}

/// Switch port. `peer` identifies the neighbor for WtpRadio/Tunnel roles.
struct PortId {
    std::uint16_t id = 0;
    PortRole role = PortRole::Lan;
    int peer = -1;

    bool operator==(const PortId& o) const { return id == o.id; }
};

struct UnicastRule {
    PortId ingress;
    MacAddr dst_mac;
    PortId egress;
};

struct MulticastGroup {
    int group_id = 0;
    std::set<std::uint16_t> ports;
};

/// src_mac == nullopt is the wildcard.
struct BroadcastRule {
    PortId ingress;
    std::optional<MacAddr> src_mac;
    MulticastGroup group;
};

enum class DropReason : std::uint8_t {
    ControlFrame,     // stage 1: all 802.11 control frames
    TxStatusReport,   // stage 1: monitor reports of injected transmissions
    SniffedBeacon,    // stage 1: beacons sniffed on a WTP monitor port
    NoRule,           // stage 2: no table hit
};

inline const char* to_string(DropReason r) {
    switch (r) {
        case DropReason::ControlFrame: return "control_frame";
        case DropReason::TxStatusReport: return "tx_status_report";
        case DropReason::SniffedBeacon: return "sniffed_beacon";
        case DropReason::NoRule: return "no_rule";
    }
    return "?";
}

struct ProcessResult {
    std::vector<std::pair<PortId, TaggedFrame>> out;
    std::optional<DropReason> drop;

    bool dropped() const { return drop.has_value(); }
};

/// Per-EAP software switch: fixed drop stage, then exact-match unicast
/// ("802.11 Frame Switching") and broadcast tables with multicast replication.
/// Confined to its owning EAP's event context; no internal locking.
class Dot11Switch {
public:
    PortId add_port(PortRole role, int peer = -1) {
        PortId p{next_port_id_++, role, peer};
        ports_.emplace(p.id, p);
        return p;
    }

    const std::map<std::uint16_t, PortId>& ports() const { return ports_; }

    void install_unicast(const UnicastRule& rule) {
        require_port(rule.ingress);
        require_port(rule.egress);
        if (rule.egress.id == rule.ingress.id)
            throw BadRule("unicast rule: egress equals ingress");
        unicast_.insert_or_assign({rule.ingress.id, rule.dst_mac}, rule.egress);
    }

    void remove_unicast(PortId ingress, const MacAddr& dst_mac) {
        unicast_.erase({ingress.id, dst_mac});
    }

    void install_broadcast(const BroadcastRule& rule) {
        require_port(rule.ingress);
        if (rule.group.ports.empty()) throw BadRule("broadcast rule: empty group");
        for (auto pid : rule.group.ports) {
            if (pid == rule.ingress.id) throw BadRule("broadcast rule: group contains ingress");
            if (!ports_.count(pid)) throw BadRule("broadcast rule: unknown port in group");
        }
        broadcast_.insert_or_assign({rule.ingress.id, rule.src_mac}, rule.group);
    }

    void remove_broadcast(PortId ingress, const std::optional<MacAddr>& src_mac) {
        broadcast_.erase({ingress.id, src_mac});
    }

    /// The Fig.-style two-stage pipeline. Never mutates the frame; every outcome
    /// is an emission list or a drop.
    ProcessResult process(PortId ingress, const TaggedFrame& tf) const {
        ProcessResult res;
        // Stage 1: fixed drop filters, in precedence order.
        if (tf.frame.kind == FrameKind::Ack) {
            res.drop = DropReason::ControlFrame;
            return res;
        }
        if (tf.meta.tx_status) {
            res.drop = DropReason::TxStatusReport;
            return res;
        }
        if (tf.frame.kind == FrameKind::Beacon && ingress.role == PortRole::WtpRadio) {
            res.drop = DropReason::SniffedBeacon;
            return res;
        }
        // Stage 2: broadcast path for broadcast destinations and probe requests
        // (probe requests fan out to all VAPs even with a unicast addr1, since
        // MAC-randomizing clients cannot be matched by address).
        if (tf.frame.addr1.is_broadcast() || tf.frame.kind == FrameKind::ProbeRequest) {
            const MulticastGroup* grp = lookup_broadcast(ingress.id, tf.frame.addr2);
            if (!grp) {
                res.drop = DropReason::NoRule;
                return res;
            }
            for (auto pid : grp->ports) res.out.emplace_back(ports_.at(pid), tf);
            return res;
        }
        auto it = unicast_.find({ingress.id, tf.frame.addr1});
        if (it == unicast_.end()) {
            res.drop = DropReason::NoRule;
            return res;
        }
        res.out.emplace_back(it->second, tf);
        return res;
    }

    /// Debug dump: one CSV line per rule, columns table,ingress,mac,egress_or_group.
    std::string dump_rules() const {
        std::ostringstream os;
        for (const auto& [key, egress] : unicast_)
            os << "unicast," << key.first << "," << key.second.to_string() << "," << egress.id
               << "\n";
        for (const auto& [key, grp] : broadcast_)
            os << "broadcast," << key.first << ","
               << (key.second ? key.second->to_string() : std::string("*")) << "," << grp.group_id
               << "\n";
        return os.str();
    }

private:
    void require_port(const PortId& p) const {
        auto it = ports_.find(p.id);
        if (it == ports_.end()) throw BadRule("rule references unknown port");
    }

    const MulticastGroup* lookup_broadcast(std::uint16_t ingress, const MacAddr& src) const {
        if (auto it = broadcast_.find({ingress, src}); it != broadcast_.end()) return &it->second;
        if (auto it = broadcast_.find({ingress, std::nullopt}); it != broadcast_.end())
            return &it->second;
        return nullptr;
    }

    std::uint16_t next_port_id_ = 1;
    std::map<std::uint16_t, PortId> ports_;
    std::map<std::pair<std::uint16_t, MacAddr>, PortId> unicast_;
    std::map<std::pair<std::uint16_t, std::optional<MacAddr>>, MulticastGroup> broadcast_;
};

} // namespace nxwlan
