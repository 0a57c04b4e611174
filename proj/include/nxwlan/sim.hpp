#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nxwlan/codec.hpp"
#include "nxwlan/control.hpp"
#include "nxwlan/dot11_switch.hpp"
#include "nxwlan/event.hpp"
#include "nxwlan/frame.hpp"
#include "nxwlan/metrics.hpp"
#include "nxwlan/radio.hpp"
#include "nxwlan/scenario.hpp"
#include "nxwlan/steering.hpp"

namespace nxwlan {

inline constexpr std::uint64_t kAirDelayUs = 1;
inline constexpr std::uint64_t kBeaconIntervalUs = 102400;
inline constexpr std::uint64_t kDwellUs = 100000;       // per-channel active scan dwell
inline constexpr std::uint64_t kProcDelayUs = 300;      // AP frame handling turnaround
inline constexpr std::uint64_t kAssocStepDelayUs = 1000;

/// Counters accumulated over one run; tests assert on these.
struct RunStats {
    std::uint64_t events = 0;
    std::uint64_t acks_generated = 0;
    std::uint64_t tunnel_frames = 0;
    std::uint64_t tunnel_ack_violations = 0;   // must stay 0: no Ack ever crosses a tunnel
    std::uint64_t drops_control = 0;
    std::uint64_t drops_tx_status = 0;
    std::uint64_t drops_sniffed_beacon = 0;
    std::uint64_t drops_no_rule = 0;
    std::uint64_t vap_injected = 0;
    std::uint64_t vap_auto_acked = 0;          // virtual radio acks every injection immediately
    std::uint64_t scans_started = 0;
    std::uint64_t associations = 0;
    std::uint64_t conservation_violations = 0; // measured rate above its min-cascade
};

/// Deterministic discrete-event simulation of a scenario: discovery,
/// WTP/VAP handshakes, tunneled beacons, per-waypoint scan/association, and
/// analytic per-epoch throughput. Identical (scenario, seed) gives identical
/// Metrics.
class Simulation {
public:
    Simulation(Scenario sc, std::uint64_t seed) : sc_(std::move(sc)), seed_(seed) {
        validate(sc_);
    }

    Metrics run() {
        setup();
        while (!queue_.empty()) {
            Event ev = queue_.pop();
            if (ev.t_us > horizon_us_) break;
            ++stats_.events;
            std::visit([&](const auto& p) { handle(p); }, ev.payload);
        }
        summarize(metrics_);
        return metrics_;
    }

    const RunStats& stats() const { return stats_; }

private:
    // ---- runtime state ----------------------------------------------------

    struct WtpRt {                      // a WTP hosted here for a neighbor's VAP
        PortId radio_port;
        PortId tunnel_port;
        MacAddr vap_bssid;
        std::string ssid;
        std::map<MacAddr, double> probe_tx_dbm;   // per-station probe-response TX power
    };

    struct EapRt {
        const EapConfig* cfg = nullptr;
        Dot11Switch sw;
        std::unique_ptr<EapController> ctl;
        std::map<std::string, WtpRt> wtps;        // keyed by VAP owner
        std::uint16_t mgmt_seq = 0;
    };

    struct PipeEnd {
        int eap_idx = -1;
        std::uint16_t port_id = 0;
    };

    struct Pipe {                        // home VAP <-> host WTP byte pipe
        PipeEnd home_end, host_end;
        double to_host_latency_us = 0, to_home_latency_us = 0;
        double to_host_mbps = 1, to_home_mbps = 1;
    };

    struct StaRt {
        const StaConfig* cfg = nullptr;
        Vec2 pos;
        int channel = 0;
        std::uint16_t seq = 0;
        std::uint64_t scan_gen = 0;
        std::uint64_t shadow_stream = 0;
        bool scanning = false;
        std::size_t scan_channel_idx = 0;
        std::vector<ProbeCandidate> collected;
        std::optional<ProbeCandidate> pending;    // chosen, handshake in flight
        std::optional<ProbeCandidate> serving;    // associated
    };

    // ---- construction ------------------------------------------------------

    void setup() {
        for (const auto& e : sc_.eaps) {
            eap_index_.emplace(e.name, static_cast<int>(eaps_.size()));
            eap_ids_.emplace(e.name, static_cast<std::uint16_t>(eaps_.size()));
            auto& rt = eaps_.emplace_back();
            rt.cfg = &e;
        }
        for (auto& rt : eaps_) {
            rt.ctl = std::make_unique<EapController>(
                rt.cfg->name, rt.sw, rt.cfg->policy,
                BackhaulCaps{rt.cfg->backhaul.dl.capacity_mbps, rt.cfg->backhaul.ul.capacity_mbps},
                sc_.steering, rt.cfg->rap_bssid, rt.cfg->vap_bssid, rt.cfg->ssid,
                static_cast<std::uint64_t>(2 * sc_.control.latency_ms * 1000));
        }
        for (const auto& s : sc_.stas) {
            StaRt rt;
            rt.cfg = &s;
            rt.pos = s.waypoints.front().position;
            rt.channel = s.channels.front();
            stas_.push_back(rt);
        }

        const double slot_s = sc_.schedule.settle_s + sc_.schedule.epoch_s;
        horizon_us_ = 0;
        for (std::size_t si = 0; si < sc_.stas.size(); ++si) {
            const auto& s = sc_.stas[si];
            for (std::size_t wi = 0; wi < s.waypoints.size(); ++wi) {
                for (int rep = 0; rep < sc_.schedule.repetitions; ++rep) {
                    const std::uint64_t start =
                        to_us(s.waypoints[wi].t_s + static_cast<double>(rep) * slot_s);
                    queue_.schedule(start, StaWaypoint{static_cast<int>(si),
                                                       static_cast<int>(wi), rep});
                    const std::uint64_t tick = start + to_us(sc_.schedule.settle_s);
                    queue_.schedule(tick, MeasurementTick{static_cast<int>(si),
                                                          static_cast<int>(wi), rep});
                    horizon_us_ = std::max(horizon_us_, tick + to_us(sc_.schedule.epoch_s));
                }
            }
        }
        if (horizon_us_ == 0) horizon_us_ = to_us(1.0);

        for (std::size_t i = 0; i < eaps_.size(); ++i)
            queue_.schedule(0, BeaconTick{static_cast<int>(i)});
        if (sc_.mode == SimMode::Nxwlan) {
            for (const auto& [a, b] : sc_.control.adjacency) {
                queue_.schedule(0, DiscoveryTick{eap_index_.at(a), b});
                queue_.schedule(0, DiscoveryTick{eap_index_.at(b), a});
            }
            for (std::size_t i = 0; i < eaps_.size(); ++i)
                queue_.schedule(to_us(sc_.control.report_interval_s),
                                ReportTick{static_cast<int>(i)});
        }
    }

    static std::uint64_t to_us(double seconds) {
        return static_cast<std::uint64_t>(seconds * 1e6 + 0.5);
    }

    // ---- radio environment -------------------------------------------------

    static std::uint64_t tag_hash(const std::string& s) {
        std::uint64_t h = 1469598103934665603ull;
        for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
        return h;
    }

    double link_rssi(double tx_dbm, const Vec2& a, const Vec2& b, const std::string& tag_a,
                     const std::string& tag_b, std::uint64_t stream) const {
        const double pl = path_loss(sc_.path_loss, distance(a, b));
        const double sh = shadow_db(sc_.shadow_sigma_db, seed_, stream,
                                    tag_hash(tag_a) ^ tag_hash(tag_b));
        return tx_dbm - pl - sh;
    }

    static std::int8_t quantize_dbm(double v) {
        double r = std::nearbyint(v);
        if (r < -128) r = -128;
        if (r > 127) r = 127;
        return static_cast<std::int8_t>(r);
    }

    /// Broadcasts a frame on the air interface; every co-channel radio in range
    /// (other than the transmitter's own site) gets a delivery with its own RSSI.
    /// Shadowing keys on site-level tags so the channel stays reciprocal.
    void transmit_air(int src_eap, int src_sta, const std::string& src_tag, const Vec2& pos,
                      int channel, TaggedFrame tf, double tx_dbm) {
        tf.meta.tx_power_dbm = quantize_dbm(tx_dbm);
        const std::string site_tag = src_eap >= 0 ? "eap:" + eaps_[src_eap].cfg->name
                                                  : "sta:" + stas_[src_sta].cfg->name;
        for (std::size_t i = 0; i < eaps_.size(); ++i) {
            if (static_cast<int>(i) == src_eap) continue;
            if (eaps_[i].cfg->channel != channel) continue;
            deliver_air(false, static_cast<int>(i), eaps_[i].cfg->position,
                        "eap:" + eaps_[i].cfg->name, stream_for(src_sta, -1), src_tag, site_tag,
                        pos, channel, tf, tx_dbm);
        }
        for (std::size_t i = 0; i < stas_.size(); ++i) {
            if (static_cast<int>(i) == src_sta) continue;
            if (stas_[i].channel != channel) continue;
            deliver_air(true, static_cast<int>(i), stas_[i].pos, "sta:" + stas_[i].cfg->name,
                        stream_for(src_sta, static_cast<int>(i)), src_tag, site_tag, pos,
                        channel, tf, tx_dbm);
        }
    }

    std::uint64_t stream_for(int src_sta, int dst_sta) const {
        if (dst_sta >= 0) return stas_[dst_sta].shadow_stream;
        if (src_sta >= 0) return stas_[src_sta].shadow_stream;
        return 0;
    }

    void deliver_air(bool to_sta, int idx, const Vec2& rx_pos, const std::string& rx_tag,
                     std::uint64_t stream, const std::string& src_tag,
                     const std::string& src_site_tag, const Vec2& tx_pos, int channel,
                     const TaggedFrame& tf, double tx_dbm) {
        const double rx = link_rssi(tx_dbm, tx_pos, rx_pos, src_site_tag, rx_tag, stream);
        if (rx < sc_.path_loss.sensitivity_dbm) return;
        TaggedFrame delivered = tf;
        delivered.meta.rssi_dbm = quantize_dbm(rx);
        queue_.schedule(queue_.now() + kAirDelayUs,
                        FrameDelivery{to_sta, idx, std::move(delivered), rx, channel, src_tag});
    }

    void eap_transmit_later(int eap_idx, TaggedFrame tf, double tx_dbm, bool from_wtp,
                            std::uint64_t delay_us) {
        queue_.schedule(queue_.now() + delay_us,
                        EapRadioTransmit{eap_idx, std::move(tf), tx_dbm, from_wtp});
    }

    void sta_transmit_later(int sta_idx, TaggedFrame tf, std::uint64_t delay_us) {
        queue_.schedule(queue_.now() + delay_us, StaTransmit{sta_idx, std::move(tf)});
    }

    // ---- event handlers ----------------------------------------------------

    void handle(const StaTransmit& ev) {
        auto& sta = stas_[ev.sta_idx];
        transmit_air(-1, ev.sta_idx, "sta:" + sta.cfg->name, sta.pos, sta.channel, ev.tf,
                     sc_.steering.ptx_client_dbm);
    }

    void handle(const EapRadioTransmit& ev) {
        auto& rt = eaps_[ev.eap_idx];
        const std::string tag = (ev.from_wtp ? "wtp:" : "rap:") + rt.cfg->name;
        transmit_air(ev.eap_idx, -1, tag, rt.cfg->position, rt.cfg->channel, ev.tf, ev.tx_dbm);
    }

    void handle(const BeaconTick& ev) {
        auto& rt = eaps_[ev.eap_idx];
        TaggedFrame beacon;
        beacon.frame.kind = FrameKind::Beacon;
        beacon.frame.addr1 = MacAddr::broadcast();
        beacon.frame.addr2 = rt.cfg->rap_bssid;
        beacon.frame.addr3 = rt.cfg->rap_bssid;
        beacon.frame.seq = rt.mgmt_seq++ % 4096;
        beacon.frame.payload.assign(rt.cfg->ssid.begin(), rt.cfg->ssid.end());
        transmit_air(ev.eap_idx, -1, "rap:" + rt.cfg->name, rt.cfg->position, rt.cfg->channel,
                     beacon, sc_.steering.ptx_client_dbm);
        if (sc_.mode == SimMode::Nxwlan) {
            // The VAP's beacons fan out through every established tunnel.
            TaggedFrame vb = beacon;
            vb.frame.addr2 = rt.cfg->vap_bssid;
            vb.frame.addr3 = rt.cfg->vap_bssid;
            vap_inject(ev.eap_idx, vb);
        }
        if (queue_.now() + kBeaconIntervalUs <= horizon_us_)
            queue_.schedule(queue_.now() + kBeaconIntervalUs, BeaconTick{ev.eap_idx});
    }

    void handle(const ReportTick& ev) {
        eaps_[ev.eap_idx].ctl->emit_backhaul_reports();
        drain_controller(ev.eap_idx);
        const std::uint64_t next = queue_.now() + to_us(sc_.control.report_interval_s);
        if (next <= horizon_us_) queue_.schedule(next, ReportTick{ev.eap_idx});
    }

    void handle(const DiscoveryTick& ev) {
        eaps_[ev.eap_idx].ctl->on_discovery(ev.neighbor, queue_.now());
        drain_controller(ev.eap_idx);
    }

    void handle(const TimerFire& ev) {
        eaps_[ev.eap_idx].ctl->on_timeout(ev.neighbor, ev.token);
        drain_controller(ev.eap_idx);
    }

    void handle(const ControlDelivery& ev) {
        auto msg = decode_control(ev.bytes, eap_ids_);
        if (!msg) return;
        auto& rt = eaps_[ev.eap_idx];
        if (const auto* req = std::get_if<WtpSetupRequest>(&msg->body))
            rt.ctl->on_setup_request(*msg, *req);
        else if (const auto* c = std::get_if<WtpSetupComplete>(&msg->body))
            rt.ctl->on_setup_complete(*msg, *c, queue_.now());
        else if (const auto* r = std::get_if<BackhaulReport>(&msg->body))
            rt.ctl->on_backhaul_report(msg->from, *r);
        sync_wtps(ev.eap_idx);
        sync_pipes(ev.eap_idx);
        drain_controller(ev.eap_idx);
    }

    void handle(const TunnelDelivery& ev) {
        ++stats_.tunnel_frames;
        auto decoded = decode(ev.bytes);
        if (!decode_ok(decoded)) return;
        const TaggedFrame& tf = decoded_frame(decoded);
        if (tf.frame.kind == FrameKind::Ack) {
            ++stats_.tunnel_ack_violations;
            return;
        }
        auto& rt = eaps_[ev.eap_idx];
        auto pit = rt.sw.ports().find(ev.port_id);
        if (pit == rt.sw.ports().end()) return;
        dispatch(ev.eap_idx, pit->second, rt.sw.process(pit->second, tf));
    }

    void handle(const FrameDelivery& ev) {
        if (ev.to_sta) sta_rx(ev);
        else eap_rx(ev);
    }

    void handle(const StaWaypoint& ev) {
        auto& sta = stas_[ev.sta_idx];
        sta.pos = sta.cfg->waypoints[ev.waypoint_idx].position;
        sta.shadow_stream = (static_cast<std::uint64_t>(ev.sta_idx) << 40) ^
                            (static_cast<std::uint64_t>(ev.waypoint_idx) << 20) ^
                            static_cast<std::uint64_t>(ev.rep);
        if (sta.serving) {
            const int home = eap_index_.at(sta.cfg->home_eap);
            eaps_[home].ctl->on_disassociation(sta.cfg->mac);
        }
        sta.serving.reset();
        sta.pending.reset();
        sta.collected.clear();
        sta.scanning = true;
        sta.scan_channel_idx = 0;
        ++sta.scan_gen;
        ++stats_.scans_started;
        begin_dwell(ev.sta_idx);
    }

    void handle(const StaDwellEnd& ev) {
        auto& sta = stas_[ev.sta_idx];
        if (!sta.scanning || ev.scan_gen != sta.scan_gen) return;
        ++sta.scan_channel_idx;
        if (sta.scan_channel_idx < sta.cfg->channels.size()) {
            begin_dwell(ev.sta_idx);
            return;
        }
        // Scan complete after a single pass: pick the loudest decodable response.
        sta.scanning = false;
        auto choice = choose_response(sta.collected, sc_.path_loss.sensitivity_dbm);
        if (!choice) return;
        sta.pending = choice;
        sta.channel = choice->channel;
        sta_transmit_later(ev.sta_idx, sta_mgmt_frame(ev.sta_idx, FrameKind::AuthRequest,
                                                      choice->bssid),
                           kAssocStepDelayUs);
    }

    void handle(const MeasurementTick& ev) {
        auto& sta = stas_[ev.sta_idx];
        MetricRow row;
        row.mode = to_string(sc_.mode);
        row.location_m = walk_distance(*sta.cfg, ev.location_idx);
        row.rep = ev.rep;
        row.serving = sta.serving ? sta.serving->serving : "none";
        row.mbps = sta.serving ? measure_throughput(ev.sta_idx) : 0.0;
        metrics_.rows.push_back(std::move(row));
    }

    // ---- station behavior --------------------------------------------------

    void begin_dwell(int sta_idx) {
        auto& sta = stas_[sta_idx];
        sta.channel = sta.cfg->channels[sta.scan_channel_idx];
        TaggedFrame probe;
        probe.frame.kind = FrameKind::ProbeRequest;
        probe.frame.addr1 = MacAddr::broadcast();
        probe.frame.addr2 = sta.cfg->mac;
        probe.frame.addr3 = MacAddr::broadcast();
        probe.frame.seq = sta.seq++ % 4096;
        const auto& ssid = eaps_[eap_index_.at(sta.cfg->home_eap)].cfg->ssid;
        probe.frame.payload.assign(ssid.begin(), ssid.end());
        transmit_air(-1, sta_idx, "sta:" + sta.cfg->name, sta.pos, sta.channel, probe,
                     sc_.steering.ptx_client_dbm);
        queue_.schedule(queue_.now() + kDwellUs, StaDwellEnd{sta_idx, sta.scan_gen});
    }

    TaggedFrame sta_mgmt_frame(int sta_idx, FrameKind kind, const MacAddr& bssid) {
        auto& sta = stas_[sta_idx];
        TaggedFrame tf;
        tf.frame.kind = kind;
        tf.frame.addr1 = bssid;
        tf.frame.addr2 = sta.cfg->mac;
        tf.frame.addr3 = bssid;
        tf.frame.seq = sta.seq++ % 4096;
        return tf;
    }

    void sta_rx(const FrameDelivery& ev) {
        auto& sta = stas_[ev.idx];
        const auto& f = ev.tf.frame;
        if (f.kind == FrameKind::ProbeResponse && sta.scanning && f.addr1 == sta.cfg->mac) {
            const auto& home_ssid = eaps_[eap_index_.at(sta.cfg->home_eap)].cfg->ssid;
            if (std::string(f.payload.begin(), f.payload.end()) == home_ssid) {
                sta.collected.push_back({ev.rssi_dbm, f.addr2, ev.src_tag, ev.channel});
                ack_from_sta(ev.idx, f.addr2);
            }
            return;
        }
        if (f.addr1 != sta.cfg->mac) return;
        if (f.kind == FrameKind::AuthResponse && sta.pending && f.addr2 == sta.pending->bssid) {
            ack_from_sta(ev.idx, f.addr2);
            sta_transmit_later(ev.idx, sta_mgmt_frame(ev.idx, FrameKind::AssocRequest,
                                                      sta.pending->bssid),
                               kAssocStepDelayUs);
            return;
        }
        if (f.kind == FrameKind::AssocResponse && sta.pending && f.addr2 == sta.pending->bssid) {
            ack_from_sta(ev.idx, f.addr2);
            sta.serving = sta.pending;
            sta.pending.reset();
            ++stats_.associations;
            return;
        }
        if (f.kind == FrameKind::Data) ack_from_sta(ev.idx, f.addr2);
    }

    void ack_from_sta(int sta_idx, const MacAddr& transmitter) {
        ++stats_.acks_generated;
        sta_transmit_later(sta_idx, make_ack(transmitter), kSifsUs);
    }

    // ---- EAP behavior ------------------------------------------------------

    void eap_rx(const FrameDelivery& ev) {
        auto& rt = eaps_[ev.idx];
        const auto& f = ev.tf.frame;

        // RAP MAC: owns frames for its own BSS.
        if (f.kind == FrameKind::ProbeRequest) {
            on_probe_at_eap(ev.idx, ev);
        } else if (f.addr1 == rt.cfg->rap_bssid &&
                   (f.kind == FrameKind::AuthRequest || f.kind == FrameKind::AssocRequest)) {
            ack_from_eap(ev.idx, f.addr2);   // control frames are generated at the radio
            TaggedFrame resp;
            resp.frame.kind = f.kind == FrameKind::AuthRequest ? FrameKind::AuthResponse
                                                               : FrameKind::AssocResponse;
            resp.frame.addr1 = f.addr2;
            resp.frame.addr2 = rt.cfg->rap_bssid;
            resp.frame.addr3 = rt.cfg->rap_bssid;
            resp.frame.seq = rt.mgmt_seq++ % 4096;
            eap_transmit_later(ev.idx, resp, sc_.steering.ptx_client_dbm, false, kProcDelayUs);
            if (f.kind == FrameKind::AssocRequest)
                rt.ctl->on_association(f.addr2, RoamTarget{true, {}});
        }

        // WTP monitor interfaces forward everything they sniff into the switch;
        // the drop stage deals with acks, tx reports and foreign beacons.
        if (sc_.mode == SimMode::Nxwlan) {
            for (auto& [owner, wtp] : rt.wtps) {
                if (f.addr1 == wtp.vap_bssid && f.kind != FrameKind::Ack &&
                    f.kind != FrameKind::Beacon)
                    ack_from_eap(ev.idx, f.addr2);
                dispatch(ev.idx, wtp.radio_port, rt.sw.process(wtp.radio_port, ev.tf));
            }
        }
    }

    /// Probe handling at an EAP: run the steering calculation once, answer for
    /// the local RAP when the SSID matches, and program the per-station probe
    /// TX powers of every hosted WTP whose VAP matches. The WTP fan-in of the
    /// request itself rides the switch like any sniffed frame.
    void on_probe_at_eap(int eap_idx, const FrameDelivery& ev) {
        auto& rt = eaps_[eap_idx];
        const MacAddr sta = ev.tf.frame.addr2;
        const std::string probed_ssid(ev.tf.frame.payload.begin(), ev.tf.frame.payload.end());
        const bool rap_match = probed_ssid == rt.cfg->ssid;
        bool any_vap_match = false;
        for (const auto& [owner, wtp] : rt.wtps)
            if (wtp.ssid == probed_ssid) any_vap_match = true;

        double rap_tx = sc_.steering.ptx_client_dbm;
        bool rap_respond = rap_match;
        if (sc_.mode == SimMode::Nxwlan && (rap_match || any_vap_match)) {
            if (ev.rssi_dbm < sc_.steering.prx_low_dbm) return;
            auto decision = rt.ctl->on_probe_request(sta, ev.rssi_dbm, local_load(eap_idx, sta));
            rap_respond = rap_match && decision.predicted_phy_mbps > 0;
            rap_tx = decision.rap_tx_dbm;
            for (auto& [owner, wtp] : rt.wtps) {
                auto it = decision.vaps.find(owner);
                if (it == decision.vaps.end() || wtp.ssid != probed_ssid) continue;
                if (decision.predicted_phy_mbps > 0) wtp.probe_tx_dbm[sta] = it->second.tx_dbm;
            }
        }
        if (rap_respond) {
            TaggedFrame resp;
            resp.frame.kind = FrameKind::ProbeResponse;
            resp.frame.addr1 = sta;
            resp.frame.addr2 = rt.cfg->rap_bssid;
            resp.frame.addr3 = rt.cfg->rap_bssid;
            resp.frame.seq = rt.mgmt_seq++ % 4096;
            resp.frame.payload.assign(rt.cfg->ssid.begin(), rt.cfg->ssid.end());
            eap_transmit_later(eap_idx, resp, rap_tx, false, kProcDelayUs);
        }
    }

    void ack_from_eap(int eap_idx, const MacAddr& transmitter) {
        ++stats_.acks_generated;
        eap_transmit_later(eap_idx, make_ack(transmitter), sc_.steering.ptx_client_dbm, false,
                           kSifsUs);
    }

    /// Ground-truth active clients in this EAP's radio cell (background fat
    /// clients plus any other subject stations it currently serves), excluding
    /// the probing station itself.
    ClientLoad local_load(int eap_idx, const MacAddr& exclude) const {
        const auto& rt = eaps_[eap_idx];
        ClientLoad load;
        for (const auto& f : rt.cfg->fat_clients) load.phy_rates_mbps.push_back(f.phy_rate_mbps);
        for (const auto& sta : stas_) {
            if (sta.cfg->mac == exclude || !sta.serving) continue;
            if (serving_eap_idx(sta) != eap_idx) continue;
            load.phy_rates_mbps.push_back(sta_phy_rate(sta));
        }
        return load;
    }

    int serving_eap_idx(const StaRt& sta) const {
        const std::string& tag = sta.serving->serving;
        return eap_index_.at(tag.substr(tag.find(':') + 1));
    }

    double sta_phy_rate(const StaRt& sta) const {
        const auto& site = eaps_[serving_eap_idx(sta)];
        const double rx =
            link_rssi(sc_.steering.ptx_client_dbm, sta.pos, site.cfg->position,
                      "sta:" + sta.cfg->name, "eap:" + site.cfg->name, sta.shadow_stream);
        return predict_phy_rate(sc_.steering, rx);
    }

    // ---- VAP / switch plumbing ---------------------------------------------

    void vap_inject(int eap_idx, const TaggedFrame& tf) {
        auto& rt = eaps_[eap_idx];
        ++stats_.vap_injected;
        ++stats_.vap_auto_acked;   // hw-sim style virtual radio: instant tx confirm, no retries
        dispatch(eap_idx, rt.ctl->vap_port(), rt.sw.process(rt.ctl->vap_port(), tf));
    }

    void dispatch(int eap_idx, PortId ingress, const ProcessResult& res) {
        if (res.dropped()) {
            switch (*res.drop) {
                case DropReason::ControlFrame: ++stats_.drops_control; break;
                case DropReason::TxStatusReport: ++stats_.drops_tx_status; break;
                case DropReason::SniffedBeacon: ++stats_.drops_sniffed_beacon; break;
                case DropReason::NoRule: ++stats_.drops_no_rule; break;
            }
            return;
        }
        for (const auto& [port, tf] : res.out) {
            switch (port.role) {
                case PortRole::Tunnel:
                    pipe_send(eap_idx, port.id, tf);
                    break;
                case PortRole::WtpRadio:
                    wtp_transmit(eap_idx, port, tf);
                    break;
                case PortRole::VapAttach:
                    vap_rx(eap_idx, ingress, tf);
                    break;
                case PortRole::RapRadio:
                    eap_transmit_later(eap_idx, tf, sc_.steering.ptx_client_dbm, false, 0);
                    break;
                case PortRole::Lan:
                    break;   // uplink leaves the modeled system here
            }
        }
    }

    void wtp_transmit(int eap_idx, const PortId& port, const TaggedFrame& tf) {
        auto& rt = eaps_[eap_idx];
        for (auto& [owner, wtp] : rt.wtps) {
            if (wtp.radio_port.id != port.id) continue;
            double tx = sc_.steering.ptx_client_dbm;
            if (tf.frame.kind == FrameKind::ProbeResponse) {
                auto it = wtp.probe_tx_dbm.find(tf.frame.addr1);
                if (it != wtp.probe_tx_dbm.end()) tx = it->second;
            }
            eap_transmit_later(eap_idx, tf, tx, true, 0);
            // Transmissions injected over the monitor interface are always
            // reported back; the switch drop stage filters the report.
            TaggedFrame report = tf;
            report.meta.injected = true;
            report.meta.tx_status = true;
            dispatch(eap_idx, wtp.radio_port, rt.sw.process(wtp.radio_port, report));
            return;
        }
    }

    /// Frames the switch hands to the VAP. Pre-association management is
    /// answered packet-out into the tunnel the frame arrived from; the
    /// association completion installs the data-path rules.
    void vap_rx(int eap_idx, PortId ingress, const TaggedFrame& tf) {
        auto& rt = eaps_[eap_idx];
        const auto& f = tf.frame;
        if (ingress.role != PortRole::Tunnel) return;
        const std::string host = host_of_tunnel_port(eap_idx, ingress.id);
        if (host.empty()) return;
        switch (f.kind) {
            case FrameKind::ProbeRequest: {
                const std::string probed(f.payload.begin(), f.payload.end());
                if (probed != rt.cfg->ssid) return;
                TaggedFrame resp;
                resp.frame.kind = FrameKind::ProbeResponse;
                resp.frame.addr1 = f.addr2;
                resp.frame.addr2 = rt.cfg->vap_bssid;
                resp.frame.addr3 = rt.cfg->vap_bssid;
                resp.frame.seq = rt.mgmt_seq++ % 4096;
                resp.frame.payload.assign(rt.cfg->ssid.begin(), rt.cfg->ssid.end());
                packet_out(eap_idx, host, resp);
                break;
            }
            case FrameKind::AuthRequest:
            case FrameKind::AssocRequest: {
                if (f.addr1 != rt.cfg->vap_bssid) return;
                TaggedFrame resp;
                resp.frame.kind = f.kind == FrameKind::AuthRequest ? FrameKind::AuthResponse
                                                                   : FrameKind::AssocResponse;
                resp.frame.addr1 = f.addr2;
                resp.frame.addr2 = rt.cfg->vap_bssid;
                resp.frame.addr3 = rt.cfg->vap_bssid;
                resp.frame.seq = rt.mgmt_seq++ % 4096;
                packet_out(eap_idx, host, resp);
                if (f.kind == FrameKind::AssocRequest)
                    rt.ctl->on_association(f.addr2, RoamTarget{false, host});
                break;
            }
            default:
                break;   // uplink data would decrypt and exit to the LAN here
        }
    }

    /// Controller packet-out: inject a VAP frame directly into a tunnel.
    void packet_out(int eap_idx, const std::string& host, const TaggedFrame& tf) {
        ++stats_.vap_injected;
        ++stats_.vap_auto_acked;
        auto it = pipes_.find({eaps_[eap_idx].cfg->name, host});
        if (it == pipes_.end()) return;
        send_through_pipe(it->second, true, tf);
    }

    std::string host_of_tunnel_port(int eap_idx, std::uint16_t port_id) const {
        const auto& name = eaps_[eap_idx].cfg->name;
        for (const auto& [key, pipe] : pipes_) {
            if (key.first == name && pipe.home_end.port_id == port_id) return key.second;
            if (key.second == name && pipe.host_end.port_id == port_id) return key.first;
        }
        return {};
    }

    void pipe_send(int eap_idx, std::uint16_t port_id, const TaggedFrame& tf) {
        const auto& name = eaps_[eap_idx].cfg->name;
        for (auto& [key, pipe] : pipes_) {
            if (key.first == name && pipe.home_end.port_id == port_id) {
                send_through_pipe(pipe, true, tf);
                return;
            }
            if (key.second == name && pipe.host_end.port_id == port_id) {
                send_through_pipe(pipe, false, tf);
                return;
            }
        }
    }

    void send_through_pipe(const Pipe& pipe, bool toward_host, const TaggedFrame& tf) {
        auto bytes = encode(tf);
        const double mbps = toward_host ? pipe.to_host_mbps : pipe.to_home_mbps;
        const double latency = toward_host ? pipe.to_host_latency_us : pipe.to_home_latency_us;
        const double ser_us = static_cast<double>(bytes.size()) * 8.0 / mbps;
        const auto& end = toward_host ? pipe.host_end : pipe.home_end;
        queue_.schedule(queue_.now() + static_cast<std::uint64_t>(latency + ser_us) + 1,
                        TunnelDelivery{end.eap_idx, end.port_id, std::move(bytes)});
    }

    // ---- controller glue ----------------------------------------------------

    void drain_controller(int eap_idx) {
        auto& ctl = *eaps_[eap_idx].ctl;
        for (auto& msg : ctl.outbox()) {
            auto bytes = encode_control(msg, eap_ids_);
            queue_.schedule(queue_.now() + to_us(sc_.control.latency_ms / 1000.0),
                            ControlDelivery{eap_index_.at(msg.to), std::move(bytes)});
        }
        ctl.outbox().clear();
        for (const auto& t : ctl.timer_requests())
            queue_.schedule(t.deadline_us, TimerFire{eap_idx, t.neighbor, t.token});
        ctl.timer_requests().clear();
    }

    /// Mirrors controller host-side state into the sim's WTP runtime records.
    void sync_wtps(int eap_idx) {
        auto& rt = eaps_[eap_idx];
        for (const auto& [owner, host] : rt.ctl->host_sides()) {
            if (rt.wtps.count(owner)) continue;
            WtpRt wtp;
            wtp.radio_port = host.wtp_radio_port;
            wtp.tunnel_port = host.tunnel_port;
            wtp.vap_bssid = host.vap_bssid;
            wtp.ssid = host.ssid;
            rt.wtps.emplace(owner, std::move(wtp));
        }
    }

    /// Wires byte pipes for newly established VAP<->WTP pairs and pushes the
    /// first backhaul report so steering has data before the first scan.
    void sync_pipes(int eap_idx) {
        auto& rt = eaps_[eap_idx];
        for (const auto& [host_name, side] : rt.ctl->vap_sides()) {
            if (side.phase != NeighborPhase::Established || !side.tunnel_port) continue;
            auto key = std::make_pair(rt.cfg->name, host_name);
            if (pipes_.count(key)) continue;
            const int host_idx = eap_index_.at(host_name);
            const auto& host_rt = eaps_[host_idx];
            auto host_side = host_rt.ctl->host_sides().find(rt.cfg->name);
            if (host_side == host_rt.ctl->host_sides().end()) continue;
            Pipe pipe;
            pipe.home_end = {eap_idx, side.tunnel_port->id};
            pipe.host_end = {host_idx, host_side->second.tunnel_port.id};
            const auto& hb = rt.cfg->backhaul;
            const auto& gb = host_rt.cfg->backhaul;
            pipe.to_host_latency_us = (hb.ul.latency_ms + gb.dl.latency_ms) * 1000.0;
            pipe.to_home_latency_us = (gb.ul.latency_ms + hb.dl.latency_ms) * 1000.0;
            pipe.to_host_mbps = std::min(hb.ul.capacity_mbps, gb.dl.capacity_mbps);
            pipe.to_home_mbps = std::min(gb.ul.capacity_mbps, hb.dl.capacity_mbps);
            pipes_.emplace(key, pipe);
            rt.ctl->emit_backhaul_reports();
            drain_controller(eap_idx);
        }
    }

    // ---- measurement ---------------------------------------------------------

    double walk_distance(const StaConfig& cfg, int waypoint_idx) const {
        double d = 0;
        for (int i = 1; i <= waypoint_idx; ++i)
            d += distance(cfg.waypoints[i - 1].position, cfg.waypoints[i].position);
        return d;
    }

    /// Analytic end-to-end downlink rate for one associated station: DCF/TXOP
    /// wireless share at the serving cell, capped by the home DL backhaul share
    /// and, when served via a WTP, by the home UL backhaul carrying the tunnel.
    double measure_throughput(int sta_idx) {
        const auto& sta = stas_[sta_idx];
        const int serving_idx = serving_eap_idx(sta);
        const auto& serving = eaps_[serving_idx];
        const int home_idx = eap_index_.at(sta.cfg->home_eap);
        const bool via_wtp = sta.serving->serving.rfind("wtp:", 0) == 0;

        std::vector<BssMember> members;
        std::size_t self = 0;
        for (const auto& f : serving.cfg->fat_clients)
            members.push_back({f.phy_rate_mbps, !f.uplink, std::nullopt});
        for (std::size_t i = 0; i < stas_.size(); ++i) {
            const auto& other = stas_[i];
            if (static_cast<int>(i) == sta_idx) {
                self = members.size();
                members.push_back({sta_phy_rate(sta), sta.cfg->downlink_demand,
                                   via_wtp ? std::optional<double>(
                                                 eaps_[home_idx].cfg->backhaul.ul.capacity_mbps)
                                           : std::nullopt});
                continue;
            }
            if (!other.serving || serving_eap_idx(other) != serving_idx) continue;
            std::optional<double> tunnel;
            if (other.serving->serving.rfind("wtp:", 0) == 0)
                tunnel = eaps_[eap_index_.at(other.cfg->home_eap)]
                             .cfg->backhaul.ul.capacity_mbps;
            members.push_back({sta_phy_rate(other), other.cfg->downlink_demand, tunnel});
        }
        const double dl = eaps_[home_idx].cfg->backhaul.dl.capacity_mbps;
        auto rates = bss_throughput(members, dl, sc_.txop);
        const double rate = rates[self];

        // Conservation: the measured rate never exceeds any cascade element.
        ClientLoad others;
        for (std::size_t i = 0; i < members.size(); ++i)
            if (i != self) others.phy_rates_mbps.push_back(members[i].phy_rate_mbps);
        const double wireless = mac_rate(others, members[self].phy_rate_mbps, sc_.txop);
        if (rate > wireless + 1e-9 || rate > dl + 1e-9 ||
            (via_wtp && rate > eaps_[home_idx].cfg->backhaul.ul.capacity_mbps + 1e-9))
            ++stats_.conservation_violations;
        return rate;
    }

    // ---- members -------------------------------------------------------------

    Scenario sc_;
    std::uint64_t seed_;
    EventQueue queue_;
    std::vector<EapRt> eaps_;
    std::vector<StaRt> stas_;
    std::map<std::string, int> eap_index_;
    EapIdMap eap_ids_;
    std::map<std::pair<std::string, std::string>, Pipe> pipes_;   // (home, host)
    Metrics metrics_;
    RunStats stats_;
    std::uint64_t horizon_us_ = 0;
};

inline Metrics run(const Scenario& sc, std::uint64_t seed) {
    Simulation sim(sc, seed);
    return sim.run();
}

} // namespace nxwlan
