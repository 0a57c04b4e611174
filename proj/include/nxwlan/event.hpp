#pragma once

#include <cassert>
#include <cstdint>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "nxwlan/frame.hpp"

namespace nxwlan {

// Event payloads. Frame deliveries model the air interface (per-receiver RSSI
// at full precision), tunnel/control deliveries carry encoded bytes, the rest
// are timers and measurement ticks.

struct FrameDelivery {
    bool to_sta = false;   // receiver is a station (else an EAP radio)
    int idx = 0;           // receiver index
    TaggedFrame tf;
    double rssi_dbm = 0;
    int channel = 0;
    std::string src_tag;   // transmitting radio, e.g. "rap:bob", "wtp:alice", "sta:sta1"
};

struct TunnelDelivery {
    int eap_idx = 0;
    std::uint16_t port_id = 0;           // local Tunnel port the bytes arrive on
    std::vector<std::uint8_t> bytes;
};

struct ControlDelivery {
    int eap_idx = 0;
    std::vector<std::uint8_t> bytes;
};

struct TimerFire {
    int eap_idx = 0;
    std::string neighbor;
    std::uint64_t token = 0;
};

struct BeaconTick {
    int eap_idx = 0;
};

struct ReportTick {
    int eap_idx = 0;
};

struct DiscoveryTick {
    int eap_idx = 0;
    std::string neighbor;
};

struct StaWaypoint {
    int sta_idx = 0;
    int waypoint_idx = 0;
    int rep = 0;
};

struct StaDwellEnd {
    int sta_idx = 0;
    std::uint64_t scan_gen = 0;
};

struct MeasurementTick {
    int sta_idx = 0;
    int location_idx = 0;
    int rep = 0;
};

/// Deferred station transmission (acks after SIFS, handshake steps).
struct StaTransmit {
    int sta_idx = 0;
    TaggedFrame tf;
};

/// Deferred EAP radio transmission (acks, probe/auth/assoc responses).
struct EapRadioTransmit {
    int eap_idx = 0;
    TaggedFrame tf;
    double tx_dbm = 0;
    bool from_wtp = false;
};

using EventPayload =
    std::variant<FrameDelivery, TunnelDelivery, ControlDelivery, TimerFire, BeaconTick,
                 ReportTick, DiscoveryTick, StaWaypoint, StaDwellEnd, MeasurementTick,
                 StaTransmit, EapRadioTransmit>;

struct Event {
    std::uint64_t t_us = 0;
    std::uint64_t seq = 0;   // insertion order, breaks time ties deterministically
    EventPayload payload;
};

/// Deterministic discrete-event queue: (time, insertion order) processing,
/// microsecond time base, never travels backwards.
class EventQueue {
public:
    void schedule(std::uint64_t t_us, EventPayload payload) {
        assert(t_us >= now_);
        heap_.push(Event{t_us, next_seq_++, std::move(payload)});
    }

    bool empty() const { return heap_.empty(); }
    std::uint64_t now() const { return now_; }

    Event pop() {
        Event e = heap_.top();
        heap_.pop();
        assert(e.t_us >= now_);
        now_ = e.t_us;
        return e;
    }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.t_us != b.t_us) return a.t_us > b.t_us;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t now_ = 0;
};

} // namespace nxwlan
