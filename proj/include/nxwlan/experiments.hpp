#pragma once

#include <string>

#include "nxwlan/metrics.hpp"
#include "nxwlan/scenario.hpp"
#include "nxwlan/sim.hpp"

namespace nxwlan {

struct ExperimentParams {
    int repetitions = 10;
    double epoch_s = 10.0;
    double settle_s = 1.0;
    bool txop = false;
    SimMode mode = SimMode::Nxwlan;
};

namespace detail {

/// Two adjacent apartments: Bob's AP near the start of the walk, Alice's AP
/// behind the shared wall. The client walks 0..18 m in 2 m steps; the channel
/// is calibrated so Bob's coverage ends just past the 12 m waypoint while
/// Alice stays reachable from every location.
inline Scenario two_apartment_scenario(const ExperimentParams& p) {
    Scenario sc;
    sc.mode = p.mode;
    sc.txop = p.txop;
    sc.path_loss = PathLossModel{50.0, 1.0, 4.2, -82.0};
    sc.steering = SteeringParams{};
    sc.schedule.repetitions = p.repetitions;
    sc.schedule.epoch_s = p.epoch_s;
    sc.schedule.settle_s = p.settle_s;
    sc.schedule.crossover_m = 12.0;
    sc.control.latency_ms = 10.0;
    sc.control.adjacency = {{"bob", "alice"}};

    EapConfig bob;
    bob.name = "bob";
    bob.position = {2.0, 8.0};
    bob.channel = 40;
    bob.backhaul.dl = {5.0, 50.0};
    bob.backhaul.ul = {5.0, 50.0};
    bob.rap_bssid = MacAddr::parse("02:00:00:00:01:01");
    bob.vap_bssid = MacAddr::parse("02:00:00:00:01:02");
    bob.ssid = "bobnet";
    sc.eaps.push_back(bob);

    EapConfig alice;
    alice.name = "alice";
    alice.position = {9.0, -9.0};
    alice.channel = 44;
    alice.backhaul.dl = {5.0, 50.0};
    alice.backhaul.ul = {5.0, 50.0};
    alice.rap_bssid = MacAddr::parse("02:00:00:00:02:01");
    alice.vap_bssid = MacAddr::parse("02:00:00:00:02:02");
    alice.ssid = "alicenet";
    sc.eaps.push_back(alice);

    StaConfig sta;
    sta.name = "sta1";
    sta.mac = MacAddr::parse("02:00:00:00:10:01");
    sta.home_eap = "bob";
    sta.channels = {40, 44};
    const double slot_s = (p.settle_s + p.epoch_s) * static_cast<double>(p.repetitions);
    for (int i = 0; i < 10; ++i)
        sta.waypoints.push_back({static_cast<double>(i) * slot_s, {2.0 * i, 0.0}});
    sc.stas.push_back(sta);
    return sc;
}

} // namespace detail

/// Extended-coverage experiment: no background load, baseline vs nxwlan.
inline Scenario experiment1(ExperimentParams p = {}) { return detail::two_apartment_scenario(p); }

/// Load-balancing experiment: Bob carries two backlogged 6 Mbit/s-PHY uplink
/// clients, Alice is idle.
inline Scenario experiment2(ExperimentParams p = {}) {
    Scenario sc = detail::two_apartment_scenario(p);
    sc.eaps[0].fat_clients = {{6.0, true}, {6.0, true}};
    return sc;
}

/// Runs one built-in experiment in both modes and merges the metrics
/// (baseline rows first, then nxwlan; summaries likewise).
inline Metrics run_experiment(int which, std::uint64_t seed, ExperimentParams p = {}) {
    Metrics merged;
    for (SimMode mode : {SimMode::Baseline, SimMode::Nxwlan}) {
        p.mode = mode;
        Scenario sc = which == 1 ? experiment1(p) : experiment2(p);
        Metrics m = run(sc, seed);
        merged.rows.insert(merged.rows.end(), m.rows.begin(), m.rows.end());
    }
    summarize(merged);
    return merged;
}

} // namespace nxwlan
