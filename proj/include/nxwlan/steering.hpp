#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nxwlan/errors.hpp"

namespace nxwlan {

/// Constants of the probe-response TX-power steering algorithm.
struct SteeringParams {
    double r_all_max_mbps = 25.0;   // willingness normalization rate
    double prx_low_dbm = -90.0;     // minimum receive power for probe-request reception
    double prx_high_dbm = -50.0;    // maximum possible probe-request receive power
    double ptx_client_dbm = 15.0;   // assumed fixed client transmit power
    // RSSI threshold (dBm) -> PHY rate (Mbit/s); both strictly increasing.
    // Defaults are typical 802.11a receiver sensitivities (configuration, not ground truth).
    std::vector<std::pair<double, double>> rate_table{
        {-82, 6}, {-81, 9}, {-79, 12}, {-77, 18}, {-74, 24}, {-70, 36}, {-66, 48}, {-65, 54},
    };

    void validate() const {
        if (!(prx_low_dbm < prx_high_dbm)) throw DomainError("steering: prx_low must be < prx_high");
        if (!(r_all_max_mbps > 0)) throw DomainError("steering: r_all_max must be > 0");
        if (rate_table.empty()) throw DomainError("steering: empty rate table");
        for (std::size_t i = 0; i < rate_table.size(); ++i) {
            if (rate_table[i].second <= 0) throw DomainError("steering: rate table rate <= 0");
            if (i > 0 && (rate_table[i].first <= rate_table[i - 1].first ||
                          rate_table[i].second <= rate_table[i - 1].second))
                throw DomainError("steering: rate table not strictly increasing");
        }
    }
};

/// PHY rates of the active ("fat") clients in a BSS.
struct ClientLoad {
    std::vector<double> phy_rates_mbps;
};

/// Available backhaul capacities, Mbit/s.
struct BackhaulCaps {
    double dl_mbps = 0;
    double ul_mbps = 0;
};

/// Relative airtime of a prospective client joining `load`, assuming DCF
/// packet-level fairness: (1/k) / sum over load+{k} of (1/r_i).
inline double airtime_share(const ClientLoad& load, double k_rate_mbps) {
    if (!(k_rate_mbps > 0)) throw DomainError("airtime_share: rate <= 0");
    double denom = 0;
    for (double r : load.phy_rates_mbps) {
        if (!(r > 0)) throw DomainError("airtime_share: rate <= 0");
        denom += 1.0 / r;
    }
    denom += 1.0 / k_rate_mbps;
    return (1.0 / k_rate_mbps) / denom;
}

/// Expected MAC-layer throughput of the prospective client. DCF: airtime share
/// times PHY rate (which equals 1/sum(1/r_i) for every client). With TXOP the
/// medium splits into equal airtime instead: k / (n+1).
inline double mac_rate(const ClientLoad& load, double k_rate_mbps, bool txop_mode = false) {
    if (txop_mode) {
        if (!(k_rate_mbps > 0)) throw DomainError("mac_rate: rate <= 0");
        return k_rate_mbps / static_cast<double>(load.phy_rates_mbps.size() + 1);
    }
    return airtime_share(load, k_rate_mbps) * k_rate_mbps;
}

/// Highest table rate whose threshold <= rssi; 0 (no service) below the lowest threshold.
inline double predict_phy_rate(const SteeringParams& p, double rssi_dbm) {
    double rate = 0;
    for (const auto& [thresh, r] : p.rate_table) {
        if (rssi_dbm >= thresh) rate = r;
        else break;
    }
    return rate;
}

/// Willingness to serve: min-cascade of MAC rate, DL backhaul and (for the VAP
/// path) the reported UL backhaul carrying the VAP->WTP tunnel, normalized by
/// r_all_max and clamped to [0,1].
inline double willingness(const SteeringParams& p, double mac_rate_mbps, double dl_backhaul_mbps,
                          std::optional<double> ul_tunnel_mbps = std::nullopt) {
    if (!(p.r_all_max_mbps > 0)) throw DomainError("willingness: r_all_max <= 0");
    if (mac_rate_mbps < 0 || dl_backhaul_mbps < 0 || (ul_tunnel_mbps && *ul_tunnel_mbps < 0))
        throw DomainError("willingness: negative rate");
    double r_all = std::min(mac_rate_mbps, dl_backhaul_mbps);
    if (ul_tunnel_mbps) r_all = std::min(r_all, *ul_tunnel_mbps);
    return std::min(1.0, r_all / p.r_all_max_mbps);
}

/// Encodes willingness into the probe-response TX power so that, absent
/// clipping, the receive power at the client is prx_low + w*(prx_high-prx_low)
/// regardless of distance. The 1 dBm floor avoids outage; the ptx_client
/// ceiling assumes the client probes at max power.
inline double encode_willingness(const SteeringParams& p, double prx_preq_dbm, double w) {
    if (!(w >= 0.0 && w <= 1.0)) throw DomainError("encode_willingness: w outside [0,1]");
    const double path_loss = p.ptx_client_dbm - prx_preq_dbm;
    const double ptx_min = std::max(1.0, p.prx_low_dbm + path_loss);
    return std::min(p.ptx_client_dbm, ptx_min + w * (p.prx_high_dbm - p.prx_low_dbm));
}

struct VapSteeringEntry {
    double tx_dbm = 0;
    double willingness = 0;
};

/// Output of the full probe-response TX-power calculation, with the
/// intermediate quantities exposed for diagnostics.
struct SteeringDecision {
    double predicted_phy_mbps = 0;
    double predicted_mac_mbps = 0;
    double rap_dl_bh_mbps = 0;
    double rap_ul_bh_mbps = 0;  // fetched but not applied: the RAP decision optimizes downlink
    double p_star = 0;          // RAP willingness
    double rap_tx_dbm = 0;
    std::map<std::string, VapSteeringEntry> vaps;
};

/// Computes probe-response TX powers for the local RAP and for every neighbor
/// VAP represented by a WTP on this AP. One MAC-rate prediction is shared by
/// all branches (the local radio cell is the shared medium); the branches
/// differ only in the backhaul caps entering the min-cascade. A predicted PHY
/// rate of 0 (client out of range of the rate table) collapses every
/// willingness to 0.
inline SteeringDecision calc_probe_response_tx_powers(
    const SteeringParams& p, double prx_preq_dbm, const ClientLoad& home_load,
    const BackhaulCaps& home_backhaul,
    const std::map<std::string, BackhaulCaps>& neighbor_reports) {
    if (prx_preq_dbm < p.prx_low_dbm)
        throw DomainError("calc_probe_response_tx_powers: probe below prx_low");
    SteeringDecision d;
    d.predicted_phy_mbps = predict_phy_rate(p, prx_preq_dbm);
    d.predicted_mac_mbps =
        d.predicted_phy_mbps > 0 ? mac_rate(home_load, d.predicted_phy_mbps) : 0.0;
    d.rap_dl_bh_mbps = home_backhaul.dl_mbps;
    d.rap_ul_bh_mbps = home_backhaul.ul_mbps;
    d.p_star = willingness(p, d.predicted_mac_mbps, home_backhaul.dl_mbps);
    d.rap_tx_dbm = encode_willingness(p, prx_preq_dbm, d.p_star);
    for (const auto& [name, caps] : neighbor_reports) {
        VapSteeringEntry e;
        e.willingness = willingness(p, d.predicted_mac_mbps, caps.dl_mbps, caps.ul_mbps);
        e.tx_dbm = encode_willingness(p, prx_preq_dbm, e.willingness);
        d.vaps.emplace(name, e);
    }
    return d;
}

} // namespace nxwlan
