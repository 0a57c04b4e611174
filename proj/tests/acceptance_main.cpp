// Acceptance suite: one pass/fail line per criterion, exit code equals the
// number of failures. Each check pins its tolerance in code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "nxwlan/nxwlan.hpp"

using namespace nxwlan;

namespace {

int failures = 0;

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& why) {
        if (!cond && ok) {
            ok = false;
            detail = why;
        }
    }
};

void report(const std::string& name, const Check& c, double seconds) {
    std::printf("[%s] %-28s %6.2fs %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), seconds,
                c.detail.c_str());
    if (!c.ok) ++failures;
}

void run_criterion(const std::string& name, const std::function<void(Check&)>& fn) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    fn(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(name, c, secs);
}

// ---------------------------------------------------------------------------
// Criterion: airtime conservation and DCF equal throughput (1000 random sets).

void eq_conservation(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<int> size_dist(1, 20);
    std::uniform_int_distribution<int> rate_dist(0, 7);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = size_dist(rng);
        std::vector<double> rates(n);
        double inv_sum = 0;
        for (auto& r : rates) {
            r = kPhyRatesMbps[rate_dist(rng)];
            inv_sum += 1.0 / r;
        }
        const double expected = 1.0 / inv_sum;
        double total_share = 0;
        for (int k = 0; k < n; ++k) {
            ClientLoad others;
            for (int j = 0; j < n; ++j)
                if (j != k) others.phy_rates_mbps.push_back(rates[j]);
            total_share += airtime_share(others, rates[k]);
            const double mac = mac_rate(others, rates[k]);
            c.expect(std::abs(mac - expected) <= 1e-9 * expected,
                     "DCF MAC rate deviates from 1/sum(1/r)");
        }
        c.expect(std::abs(total_share - 1.0) <= 1e-12, "airtime shares do not sum to 1");
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < 1.0, "runtime exceeded 1 s");
}

// ---------------------------------------------------------------------------
// Criterion: TX-power encoding keeps receive power flat in the non-clipping
// region and monotone in willingness everywhere (10000 randomized pairs).

void flatness(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const SteeringParams p{};
    const PathLossModel m{50, 1, 4.2, -82};
    const double span = p.prx_high_dbm - p.prx_low_dbm;
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> w_dist(0.0, 0.349);
    for (int i = 0; i < 10000; ++i) {
        const double w = w_dist(rng);
        // Floor inactive: prx_low + PL >= 1. Ceiling inactive: PL-90+w*span <= ptx.
        const double pl_lo = 1.0 - p.prx_low_dbm;
        const double pl_hi = p.ptx_client_dbm + 90.0 - w * span;
        std::uniform_real_distribution<double> pl_dist(pl_lo + 1e-9, pl_hi - 1e-9);
        const double pl = pl_dist(rng);
        const double d = std::pow(10.0, (pl - m.pl0_db) / (10.0 * m.exponent));
        const double prx = p.ptx_client_dbm - path_loss(m, d);
        const double rx = encode_willingness(p, prx, w) - (p.ptx_client_dbm - prx);
        c.expect(std::abs(rx - (p.prx_low_dbm + w * span)) <= 1e-6,
                 "receive power depends on distance in the non-clipping region");
    }
    std::uniform_real_distribution<double> prx_dist(-90, -50);
    std::uniform_real_distribution<double> w_any(0, 1);
    for (int i = 0; i < 10000; ++i) {
        const double prx = prx_dist(rng);
        double w1 = w_any(rng), w2 = w_any(rng);
        if (w1 > w2) std::swap(w1, w2);
        c.expect(encode_willingness(p, prx, w1) <= encode_willingness(p, prx, w2),
                 "encoding not monotone in willingness");
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < 1.0, "runtime exceeded 1 s");
}

// ---------------------------------------------------------------------------
// Criterion: the production TX-power calculation matches a line-by-line
// interpretation of the steering listing exactly, over 1000 random snapshots.

struct OracleResult {
    double rap_tx = 0, p_star = 0;
    std::map<std::string, std::pair<double, double>> vaps;   // name -> (tx, willingness)
};

OracleResult oracle_calc(const SteeringParams& p, double prx,
                         const std::vector<double>& fat_rates, double rap_dl, double rap_ul,
                         const std::map<std::string, BackhaulCaps>& reports) {
    OracleResult out;
    double rphy = 0;                                           // predictPhyRate (lookup)
    for (const auto& [thresh, rate] : p.rate_table) {
        if (prx >= thresh) rphy = rate;
        else break;
    }
    (void)rap_ul;                                              // fetched, not applied
    double rmac = 0;                                           // getMACRate: gamma * R_phy
    if (rphy > 0) {
        double denom = 0;
        for (double r : fat_rates) denom += 1.0 / r;
        denom += 1.0 / rphy;
        const double gamma = (1.0 / rphy) / denom;
        rmac = gamma * rphy;
    }
    auto encode = [&](double w) {                              // helper listing
        const double pl = p.ptx_client_dbm - prx;
        const double ptx_min = std::max(1.0, p.prx_low_dbm + pl);
        return std::min(p.ptx_client_dbm, ptx_min + w * (p.prx_high_dbm - p.prx_low_dbm));
    };
    const double r_all = std::min(rmac, rap_dl);
    out.p_star = std::min(1.0, r_all / p.r_all_max_mbps);
    out.rap_tx = encode(out.p_star);
    for (const auto& [name, caps] : reports) {
        double r_vap = std::min(rmac, caps.dl_mbps);
        r_vap = std::min(r_vap, caps.ul_mbps);
        const double p_vap = std::min(1.0, r_vap / p.r_all_max_mbps);
        out.vaps[name] = {encode(p_vap), p_vap};
    }
    return out;
}

void oracle_equivalence(Check& c) {
    const SteeringParams p{};
    std::mt19937_64 rng(3003);
    std::uniform_real_distribution<double> prx_dist(-90, -50);
    std::uniform_real_distribution<double> bh_dist(0, 60);
    std::uniform_int_distribution<int> load_dist(0, 6);
    std::uniform_int_distribution<int> rate_dist(0, 7);
    std::uniform_int_distribution<int> nb_dist(0, 3);
    std::uniform_int_distribution<int> zero_ul(0, 9);
    for (int trial = 0; trial < 1000; ++trial) {
        const double prx = prx_dist(rng);
        std::vector<double> fat(load_dist(rng));
        for (auto& r : fat) r = kPhyRatesMbps[rate_dist(rng)];
        const double dl = bh_dist(rng), ul = bh_dist(rng);
        std::map<std::string, BackhaulCaps> reports;
        const int nb = nb_dist(rng);
        for (int k = 0; k < nb; ++k)
            reports["n" + std::to_string(k)] = {bh_dist(rng),
                                                zero_ul(rng) == 0 ? 0.0 : bh_dist(rng)};
        auto expected = oracle_calc(p, prx, fat, dl, ul, reports);
        auto got = calc_probe_response_tx_powers(p, prx, {fat}, {dl, ul}, reports);
        c.expect(got.rap_tx_dbm == expected.rap_tx, "rap tx differs from the oracle");
        c.expect(got.p_star == expected.p_star, "rap willingness differs from the oracle");
        c.expect(got.vaps.size() == expected.vaps.size(), "vap entry count differs");
        for (const auto& [name, pair] : expected.vaps) {
            c.expect(got.vaps.count(name) == 1, "missing vap entry");
            if (!got.vaps.count(name)) continue;
            c.expect(got.vaps.at(name).tx_dbm == pair.first, "vap tx differs from the oracle");
            c.expect(got.vaps.at(name).willingness == pair.second,
                     "vap willingness differs from the oracle");
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion: switch drop semantics, copy counts, precedence, total decoding.

void switch_semantics(Check& c) {
    Dot11Switch sw;
    const PortId rap = sw.add_port(PortRole::RapRadio);
    const PortId vap = sw.add_port(PortRole::VapAttach);
    const PortId lan = sw.add_port(PortRole::Lan);
    const PortId wtp = sw.add_port(PortRole::WtpRadio, 1);
    const PortId tun = sw.add_port(PortRole::Tunnel, 1);
    const PortId tun2 = sw.add_port(PortRole::Tunnel, 2);
    const std::vector<PortId> ports{rap, vap, lan, wtp, tun, tun2};

    std::mt19937_64 rng(4004);
    std::uniform_int_distribution<int> byte_dist(0, 255);
    auto rand_mac = [&] {
        MacAddr m;
        for (auto& b : m.bytes) b = static_cast<std::uint8_t>(byte_dist(rng));
        return m;
    };

    // Drop stage: every generated ack / tx-status / WTP-sniffed beacon dies.
    for (int i = 0; i < 10000; ++i) {
        const PortId ingress = ports[rng() % ports.size()];
        const int which = static_cast<int>(rng() % 3);
        TaggedFrame tf;
        if (which == 0) {
            tf = make_ack(rand_mac());
        } else if (which == 1) {
            tf.frame.kind = FrameKind::Data;
            tf.frame.addr1 = rand_mac();
            tf.meta.injected = true;
            tf.meta.tx_status = true;
        } else {
            tf.frame.kind = FrameKind::Beacon;
            tf.frame.addr1 = MacAddr::broadcast();
            tf.frame.addr2 = rand_mac();
        }
        const PortId at = which == 2 ? wtp : ingress;
        auto res = sw.process(at, tf);
        c.expect(res.dropped() && res.out.empty(), "stage-1 frame not dropped");
    }

    // Unicast: exactly one copy on a hit. Broadcast: |group| copies, no ingress.
    const MacAddr sta = rand_mac();
    sw.install_unicast({tun, sta, wtp});
    auto hit = sw.process(tun, [&] {
        TaggedFrame tf;
        tf.frame.kind = FrameKind::Data;
        tf.frame.addr1 = sta;
        tf.frame.addr2 = rand_mac();
        return tf;
    }());
    c.expect(hit.out.size() == 1 && hit.out[0].first == wtp, "unicast hit must emit one copy");

    sw.install_broadcast({wtp, std::nullopt, MulticastGroup{1, {tun.id, tun2.id}}});
    TaggedFrame probe;
    probe.frame.kind = FrameKind::ProbeRequest;
    probe.frame.addr1 = MacAddr::broadcast();
    probe.frame.addr2 = sta;
    auto rep = sw.process(wtp, probe);
    c.expect(rep.out.size() == 2, "broadcast must emit |group| copies");
    for (const auto& [port, tf] : rep.out)
        c.expect(port.id != wtp.id, "broadcast copy emitted on the ingress port");

    // Precedence: a unicast rule for an ack destination never fires.
    sw.install_unicast({tun, sta, tun2});
    auto ack_res = sw.process(tun, make_ack(sta));
    c.expect(ack_res.dropped() && *ack_res.drop == DropReason::ControlFrame,
             "drop stage must precede table lookup");

    // Total decoding: random byte strings, plus bit flips of valid encodings.
    std::uniform_int_distribution<int> len_dist(0, 96);
    for (int i = 0; i < 100000; ++i) {
        std::vector<std::uint8_t> bytes;
        if (i % 4 == 0) {
            TaggedFrame tf;
            tf.frame.kind = FrameKind::Data;
            tf.frame.addr1 = rand_mac();
            tf.frame.addr2 = rand_mac();
            tf.frame.addr3 = rand_mac();
            tf.frame.payload.assign(rng() % 32, 0x5a);
            bytes = encode(tf);
            bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1 << (rng() % 8));
        } else {
            bytes.resize(len_dist(rng));
            for (auto& b : bytes) b = static_cast<std::uint8_t>(byte_dist(rng));
        }
        auto r = decode(bytes);
        if (decode_ok(r))
            c.expect(encode(decoded_frame(r)) == bytes, "decode accepted a non-canonical string");
    }
}

// ---------------------------------------------------------------------------
// Criterion: handshake liveness in one control-bus round trip and safety
// under rejection; no message variant can carry credentials.

struct BusNode {
    Dot11Switch sw;
    EapController ctl;
    BusNode(const std::string& name, SetupPolicy policy)
        : ctl(name, sw, policy, BackhaulCaps{50, 50}, SteeringParams{},
              MacAddr::parse("02:00:00:00:00:01"), MacAddr::parse("02:00:00:00:00:02"),
              name + "net", 2 * 10000) {}
};

void handshake(Check& c) {
    static_assert(!CarriesCredentials<WtpSetupRequest>);
    static_assert(!CarriesCredentials<WtpSetupComplete>);
    static_assert(!CarriesCredentials<BackhaulReport>);

    const std::uint64_t latency_us = 10000;   // one-way control-bus latency
    const std::vector<std::string> names{"a", "b", "c"};
    std::map<std::string, BusNode*> nodes;
    std::vector<std::unique_ptr<BusNode>> storage;
    for (const auto& n : names) {
        storage.push_back(std::make_unique<BusNode>(n, SetupPolicy::Accept));
        nodes[n] = storage.back().get();
    }

    // Scripted bus: (deliver_at, msg) processed in time order.
    struct Delivery {
        std::uint64_t at;
        ControlMsg msg;
    };
    std::vector<Delivery> bus;
    auto drain = [&](BusNode& n, std::uint64_t now) {
        for (auto& msg : n.ctl.outbox()) bus.push_back({now + latency_us, msg});
        n.ctl.outbox().clear();
        n.ctl.timer_requests().clear();
    };

    for (const auto& a : names)
        for (const auto& b : names)
            if (a != b) nodes[a]->ctl.on_discovery(b, 0);
    for (const auto& n : names) drain(*nodes[n], 0);

    for (std::uint64_t now = latency_us; now <= 2 * latency_us && !bus.empty();
         now += latency_us) {
        std::vector<Delivery> due;
        std::vector<Delivery> rest;
        for (auto& d : bus) (d.at == now ? due : rest).push_back(d);
        bus = rest;
        for (auto& d : due) {
            auto& target = *nodes[d.msg.to];
            if (const auto* req = std::get_if<WtpSetupRequest>(&d.msg.body))
                target.ctl.on_setup_request(d.msg, *req);
            else if (const auto* comp = std::get_if<WtpSetupComplete>(&d.msg.body))
                target.ctl.on_setup_complete(d.msg, *comp, now);
            drain(target, now);
        }
    }
    for (const auto& a : names)
        for (const auto& b : names) {
            if (a == b) continue;
            c.expect(nodes[a]->ctl.phase(b) == NeighborPhase::Established,
                     "pair not established");
            c.expect(nodes[a]->ctl.vap_sides().at(b).established_at_us == 2 * latency_us,
                     "establishment took more than one round trip");
        }

    // Rejection: silence; the requester times out with zero port/rule changes.
    BusNode req("r", SetupPolicy::Accept);
    BusNode rej("x", SetupPolicy::Reject);
    const auto ports_before = req.sw.ports().size();
    const auto rules_before = req.sw.dump_rules();
    req.ctl.on_discovery("x", 0);
    const auto timer = req.ctl.timer_requests().at(0);
    for (auto& msg : req.ctl.outbox())
        if (const auto* r = std::get_if<WtpSetupRequest>(&msg.body))
            rej.ctl.on_setup_request(msg, *r);
    req.ctl.outbox().clear();
    c.expect(rej.ctl.outbox().empty(), "rejecting policy must not respond");
    c.expect(rej.sw.ports().size() == 3, "rejecting policy must not create ports");
    req.ctl.on_timeout("x", timer.token);
    c.expect(req.ctl.phase("x") == NeighborPhase::Silent, "requester must fall silent");
    c.expect(req.sw.ports().size() == ports_before, "requester ports changed after rejection");
    c.expect(req.sw.dump_rules() == rules_before, "requester rules changed after rejection");
}

// ---------------------------------------------------------------------------
// Criteria: the two built-in experiments, reproduced ordinally.

std::map<double, std::vector<MetricRow>> group_rows(const Metrics& m, const std::string& mode) {
    std::map<double, std::vector<MetricRow>> out;
    for (const auto& r : m.rows)
        if (r.mode == mode) out[r.location_m].push_back(r);
    return out;
}

void experiment1_criterion(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const double crossover_m = experiment1().schedule.crossover_m;
    c.expect(crossover_m == 12.0, "crossover must be configured at 12 m");
    Metrics m = run_experiment(1, 1);
    auto base = group_rows(m, "baseline");
    auto nx = group_rows(m, "nxwlan");
    c.expect(base.size() == 10 && nx.size() == 10, "expected 10 locations");
    int coverage_holes_filled = 0;
    for (const auto& [loc, rows] : base) {
        for (const auto& r : rows) {
            if (loc >= 10.0 && r.mbps == 0.0) {
                for (const auto& n : nx[loc])
                    c.expect(n.mbps > 0.0, "nxwlan has no throughput where baseline is dead");
                ++coverage_holes_filled;
            }
        }
    }
    c.expect(coverage_holes_filled > 0, "baseline never lost coverage at 10-18 m");
    for (const auto& [loc, rows] : nx)
        if (loc > crossover_m)
            for (const auto& r : rows)
                c.expect(r.serving == "wtp:alice",
                         "not served by the neighbor WTP beyond the crossover");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < 5.0, "runtime exceeded 5 s");
}

void experiment2_criterion(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    Metrics m = run_experiment(2, 1);
    auto base = group_rows(m, "baseline");
    auto nx = group_rows(m, "nxwlan");
    c.expect(nx.size() == 10, "expected 10 locations");
    for (const auto& [loc, rows] : nx) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            c.expect(rows[i].serving == "wtp:alice", "not served by the idle neighbor");
            c.expect(rows[i].mbps > base[loc][i].mbps,
                     "nxwlan does not strictly beat the loaded baseline");
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < 5.0, "runtime exceeded 5 s");
}

void determinism(Check& c) {
    auto run_both = [] {
        Metrics m1 = run_experiment(1, 99);
        Metrics m2 = run_experiment(2, 99);
        return throughput_csv(m1) + summary_csv(m1) + throughput_csv(m2) + summary_csv(m2);
    };
    const std::string first = run_both();
    const std::string second = run_both();
    c.expect(first == second, "repeated runs differ byte-for-byte");
    c.expect(!first.empty(), "no output produced");
}

} // namespace

int main() {
    run_criterion("eq42-conservation", eq_conservation);
    run_criterion("alg2-flatness", flatness);
    run_criterion("alg1-oracle-equivalence", oracle_equivalence);
    run_criterion("switch-semantics", switch_semantics);
    run_criterion("handshake", handshake);
    run_criterion("experiment1-coverage", experiment1_criterion);
    run_criterion("experiment2-load-balance", experiment2_criterion);
    run_criterion("determinism", determinism);
    return failures;
}
