#pragma once

#include <json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nxwlan/control.hpp"
#include "nxwlan/errors.hpp"
#include "nxwlan/mac.hpp"
#include "nxwlan/radio.hpp"
#include "nxwlan/steering.hpp"

namespace nxwlan {

/// Latency/capacity description of one link direction (backhaul leg or tunnel).
struct LinkDescriptor {
    double latency_ms = 5.0;
    double capacity_mbps = 50.0;
};

struct BackhaulConfig {
    LinkDescriptor dl;
    LinkDescriptor ul;
};

/// Background station pinned to an EAP's radio cell (its "fat clients").
struct FatClient {
    double phy_rate_mbps = 6;
    bool uplink = true;
};

struct EapConfig {
    std::string name;
    Vec2 position;
    int channel = 40;
    BackhaulConfig backhaul;
    SetupPolicy policy = SetupPolicy::Accept;
    MacAddr rap_bssid;
    MacAddr vap_bssid;
    std::string ssid;
    std::vector<FatClient> fat_clients;
};

struct Waypoint {
    double t_s = 0;
    Vec2 position;
};

struct StaConfig {
    std::string name;
    MacAddr mac;
    std::string home_eap;
    std::vector<Waypoint> waypoints;
    std::vector<int> channels;
    bool downlink_demand = true;
};

struct ScheduleConfig {
    int repetitions = 10;
    double epoch_s = 10.0;
    double settle_s = 1.0;
    double crossover_m = 12.0;   // walk distance beyond which WTP service is expected
};

struct ControlConfig {
    double latency_ms = 10.0;
    double report_interval_s = 1.0;
    std::vector<std::pair<std::string, std::string>> adjacency;
};

enum class SimMode : std::uint8_t { Baseline, Nxwlan };

inline const char* to_string(SimMode m) { return m == SimMode::Baseline ? "baseline" : "nxwlan"; }

struct Scenario {
    std::vector<EapConfig> eaps;
    std::vector<StaConfig> stas;
    SteeringParams steering;
    PathLossModel path_loss;
    double shadow_sigma_db = 0.0;
    ScheduleConfig schedule;
    ControlConfig control;
    SimMode mode = SimMode::Nxwlan;
    bool txop = false;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& key,
                                     const std::string& path) {
    if (!j.contains(key)) throw ScenarioError(path + "." + key + ": missing");
    return j.at(key);
}

inline double num(const nlohmann::json& j, const std::string& key, const std::string& path,
                  std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ScenarioError(path + "." + key + ": missing");
    }
    if (!j.at(key).is_number()) throw ScenarioError(path + "." + key + ": not a number");
    return j.at(key).get<double>();
}

inline std::string str(const nlohmann::json& j, const std::string& key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_string()) throw ScenarioError(path + "." + key + ": not a string");
    return v.get<std::string>();
}

inline Vec2 vec2(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ScenarioError(path + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline LinkDescriptor link(const nlohmann::json& j, const std::string& path) {
    LinkDescriptor d;
    d.capacity_mbps = num(j, "capacity_mbps", path);
    d.latency_ms = num(j, "latency_ms", path, 5.0);
    if (d.capacity_mbps <= 0) throw ScenarioError(path + ".capacity_mbps: must be > 0");
    if (d.latency_ms < 0) throw ScenarioError(path + ".latency_ms: must be >= 0");
    return d;
}

} // namespace detail

/// Cross-field validation; throws ScenarioError naming the offending field.
inline void validate(const Scenario& sc) {
    std::set<std::string> eap_names;
    std::set<MacAddr> macs;
    for (std::size_t i = 0; i < sc.eaps.size(); ++i) {
        const auto& e = sc.eaps[i];
        const std::string path = "eaps[" + std::to_string(i) + "]";
        if (e.name.empty()) throw ScenarioError(path + ".name: empty");
        if (!eap_names.insert(e.name).second) throw ScenarioError(path + ".name: duplicate");
        if (!macs.insert(e.rap_bssid).second) throw ScenarioError(path + ".rap_bssid: duplicate");
        if (!macs.insert(e.vap_bssid).second) throw ScenarioError(path + ".vap_bssid: duplicate");
        for (std::size_t k = 0; k < e.fat_clients.size(); ++k)
            if (e.fat_clients[k].phy_rate_mbps <= 0)
                throw ScenarioError(path + ".fat_clients[" + std::to_string(k) +
                                    "].phy_rate_mbps: must be > 0");
    }
    for (std::size_t i = 0; i < sc.stas.size(); ++i) {
        const auto& s = sc.stas[i];
        const std::string path = "stas[" + std::to_string(i) + "]";
        if (!macs.insert(s.mac).second) throw ScenarioError(path + ".mac: duplicate");
        if (!eap_names.count(s.home_eap)) throw ScenarioError(path + ".home_eap: unknown EAP");
        if (s.waypoints.empty()) throw ScenarioError(path + ".waypoints: empty");
        for (std::size_t k = 1; k < s.waypoints.size(); ++k)
            if (s.waypoints[k].t_s <= s.waypoints[k - 1].t_s)
                throw ScenarioError(path + ".waypoints[" + std::to_string(k) +
                                    "].t_s: not monotone");
        if (s.channels.empty()) throw ScenarioError(path + ".channels: empty");
        std::set<int> eap_channels;
        for (const auto& e : sc.eaps) eap_channels.insert(e.channel);
        for (std::size_t k = 0; k < s.channels.size(); ++k)
            if (!eap_channels.count(s.channels[k]))
                throw ScenarioError(path + ".channels[" + std::to_string(k) +
                                    "]: not a configured EAP channel");
        for (const auto& e : sc.eaps)
            for (const auto& w : s.waypoints)
                if (distance(e.position, w.position) <= 0)
                    throw ScenarioError(path + ".waypoints: coincides with EAP " + e.name);
    }
    for (std::size_t i = 0; i < sc.control.adjacency.size(); ++i) {
        const auto& [a, b] = sc.control.adjacency[i];
        const std::string path = "control.adjacency[" + std::to_string(i) + "]";
        if (!eap_names.count(a) || !eap_names.count(b)) throw ScenarioError(path + ": unknown EAP");
        if (a == b) throw ScenarioError(path + ": self edge");
    }
    if (sc.schedule.repetitions <= 0) throw ScenarioError("schedule.repetitions: must be > 0");
    if (sc.schedule.epoch_s <= 0) throw ScenarioError("schedule.epoch_s: must be > 0");
    if (sc.schedule.settle_s < 0) throw ScenarioError("schedule.settle_s: must be >= 0");
    if (sc.control.latency_ms < 0) throw ScenarioError("control.latency_ms: must be >= 0");
    if (sc.shadow_sigma_db < 0) throw ScenarioError("shadow_sigma_db: must be >= 0");
    try {
        sc.steering.validate();
    } catch (const DomainError& e) {
        throw ScenarioError(std::string("steering: ") + e.what());
    }
    try {
        sc.path_loss.validate();
    } catch (const DomainError& e) {
        throw ScenarioError(std::string("path_loss: ") + e.what());
    }
}

inline Scenario parse_scenario(const nlohmann::json& j) {
    Scenario sc;
    if (j.contains("mode")) {
        const std::string m = detail::str(j, "mode", "");
        if (m == "baseline") sc.mode = SimMode::Baseline;
        else if (m == "nxwlan") sc.mode = SimMode::Nxwlan;
        else throw ScenarioError("mode: expected baseline or nxwlan");
    }
    sc.txop = j.value("txop", false);
    sc.shadow_sigma_db = j.value("shadow_sigma_db", 0.0);

    if (j.contains("steering")) {
        const auto& s = j.at("steering");
        sc.steering.r_all_max_mbps = detail::num(s, "r_all_max_mbps", "steering", 25.0);
        sc.steering.prx_low_dbm = detail::num(s, "prx_low_dbm", "steering", -90.0);
        sc.steering.prx_high_dbm = detail::num(s, "prx_high_dbm", "steering", -50.0);
        sc.steering.ptx_client_dbm = detail::num(s, "ptx_client_dbm", "steering", 15.0);
        if (s.contains("rate_table")) {
            sc.steering.rate_table.clear();
            const auto& t = s.at("rate_table");
            if (!t.is_array()) throw ScenarioError("steering.rate_table: not an array");
            for (std::size_t i = 0; i < t.size(); ++i) {
                const auto& row = t[i];
                if (!row.is_array() || row.size() != 2)
                    throw ScenarioError("steering.rate_table[" + std::to_string(i) +
                                        "]: expected [rssi_dbm, rate_mbps]");
                sc.steering.rate_table.emplace_back(row[0].get<double>(), row[1].get<double>());
            }
        }
    }
    if (j.contains("path_loss")) {
        const auto& p = j.at("path_loss");
        sc.path_loss.pl0_db = detail::num(p, "pl0_db", "path_loss", 40.0);
        sc.path_loss.d0_m = detail::num(p, "d0_m", "path_loss", 1.0);
        sc.path_loss.exponent = detail::num(p, "exponent", "path_loss", 3.5);
        sc.path_loss.sensitivity_dbm = detail::num(p, "sensitivity_dbm", "path_loss", -82.0);
    }
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        sc.schedule.repetitions = static_cast<int>(detail::num(s, "repetitions", "schedule", 10));
        sc.schedule.epoch_s = detail::num(s, "epoch_s", "schedule", 10.0);
        sc.schedule.settle_s = detail::num(s, "settle_s", "schedule", 1.0);
        sc.schedule.crossover_m = detail::num(s, "crossover_m", "schedule", 12.0);
    }
    if (j.contains("control")) {
        const auto& c = j.at("control");
        sc.control.latency_ms = detail::num(c, "latency_ms", "control", 10.0);
        sc.control.report_interval_s = detail::num(c, "report_interval_s", "control", 1.0);
        if (c.contains("adjacency")) {
            const auto& adj = c.at("adjacency");
            if (!adj.is_array()) throw ScenarioError("control.adjacency: not an array");
            for (std::size_t i = 0; i < adj.size(); ++i) {
                const auto& e = adj[i];
                if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
                    throw ScenarioError("control.adjacency[" + std::to_string(i) +
                                        "]: expected [eap, eap]");
                sc.control.adjacency.emplace_back(e[0].get<std::string>(),
                                                  e[1].get<std::string>());
            }
        }
    }

    const auto& eaps = detail::require(j, "eaps", "");
    if (!eaps.is_array() || eaps.empty()) throw ScenarioError("eaps: expected non-empty array");
    for (std::size_t i = 0; i < eaps.size(); ++i) {
        const auto& e = eaps[i];
        const std::string path = "eaps[" + std::to_string(i) + "]";
        EapConfig cfg;
        cfg.name = detail::str(e, "name", path);
        cfg.position = detail::vec2(detail::require(e, "position", path), path + ".position");
        cfg.channel = static_cast<int>(detail::num(e, "channel", path));
        const auto& bh = detail::require(e, "backhaul", path);
        cfg.backhaul.dl = detail::link(detail::require(bh, "dl", path + ".backhaul"),
                                       path + ".backhaul.dl");
        cfg.backhaul.ul = detail::link(detail::require(bh, "ul", path + ".backhaul"),
                                       path + ".backhaul.ul");
        const std::string policy = e.value("policy", std::string("accept"));
        if (policy == "accept") cfg.policy = SetupPolicy::Accept;
        else if (policy == "reject") cfg.policy = SetupPolicy::Reject;
        else throw ScenarioError(path + ".policy: expected accept or reject");
        try {
            cfg.rap_bssid = MacAddr::parse(detail::str(e, "rap_bssid", path));
            cfg.vap_bssid = MacAddr::parse(detail::str(e, "vap_bssid", path));
        } catch (const DomainError& err) {
            throw ScenarioError(path + ": " + err.what());
        }
        cfg.ssid = detail::str(e, "ssid", path);
        if (e.contains("fat_clients")) {
            for (std::size_t k = 0; k < e.at("fat_clients").size(); ++k) {
                const auto& f = e.at("fat_clients")[k];
                const std::string fpath = path + ".fat_clients[" + std::to_string(k) + "]";
                FatClient fc;
                fc.phy_rate_mbps = detail::num(f, "phy_rate_mbps", fpath);
                fc.uplink = f.value("uplink", true);
                cfg.fat_clients.push_back(fc);
            }
        }
        sc.eaps.push_back(std::move(cfg));
    }

    if (j.contains("stas")) {
        const auto& stas = j.at("stas");
        if (!stas.is_array()) throw ScenarioError("stas: expected array");
        for (std::size_t i = 0; i < stas.size(); ++i) {
            const auto& s = stas[i];
            const std::string path = "stas[" + std::to_string(i) + "]";
            StaConfig cfg;
            cfg.name = detail::str(s, "name", path);
            try {
                cfg.mac = MacAddr::parse(detail::str(s, "mac", path));
            } catch (const DomainError& err) {
                throw ScenarioError(path + ".mac: " + err.what());
            }
            cfg.home_eap = detail::str(s, "home_eap", path);
            cfg.downlink_demand = s.value("downlink_demand", true);
            const auto& wps = detail::require(s, "waypoints", path);
            for (std::size_t k = 0; k < wps.size(); ++k) {
                const auto& w = wps[k];
                const std::string wpath = path + ".waypoints[" + std::to_string(k) + "]";
                Waypoint wp;
                wp.t_s = detail::num(w, "t_s", wpath);
                wp.position = detail::vec2(detail::require(w, "position", wpath),
                                           wpath + ".position");
                cfg.waypoints.push_back(wp);
            }
            const auto& chans = detail::require(s, "channels", path);
            for (const auto& c : chans) cfg.channels.push_back(c.get<int>());
            sc.stas.push_back(std::move(cfg));
        }
    }

    validate(sc);
    return sc;
}

inline Scenario load_scenario(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open scenario file: " + file);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("json: ") + e.what());
    }
    return parse_scenario(j);
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
    nlohmann::json j;
    j["mode"] = to_string(sc.mode);
    j["txop"] = sc.txop;
    j["shadow_sigma_db"] = sc.shadow_sigma_db;
    j["steering"] = {{"r_all_max_mbps", sc.steering.r_all_max_mbps},
                     {"prx_low_dbm", sc.steering.prx_low_dbm},
                     {"prx_high_dbm", sc.steering.prx_high_dbm},
                     {"ptx_client_dbm", sc.steering.ptx_client_dbm}};
    auto& table = j["steering"]["rate_table"];
    for (const auto& [thresh, rate] : sc.steering.rate_table) table.push_back({thresh, rate});
    j["path_loss"] = {{"pl0_db", sc.path_loss.pl0_db},
                      {"d0_m", sc.path_loss.d0_m},
                      {"exponent", sc.path_loss.exponent},
                      {"sensitivity_dbm", sc.path_loss.sensitivity_dbm}};
    j["schedule"] = {{"repetitions", sc.schedule.repetitions},
                     {"epoch_s", sc.schedule.epoch_s},
                     {"settle_s", sc.schedule.settle_s},
                     {"crossover_m", sc.schedule.crossover_m}};
    j["control"] = {{"latency_ms", sc.control.latency_ms},
                    {"report_interval_s", sc.control.report_interval_s}};
    auto& adj = j["control"]["adjacency"];
    adj = nlohmann::json::array();
    for (const auto& [a, b] : sc.control.adjacency) adj.push_back({a, b});
    j["eaps"] = nlohmann::json::array();
    for (const auto& e : sc.eaps) {
        nlohmann::json je;
        je["name"] = e.name;
        je["position"] = {e.position.x, e.position.y};
        je["channel"] = e.channel;
        je["backhaul"] = {{"dl",
                           {{"capacity_mbps", e.backhaul.dl.capacity_mbps},
                            {"latency_ms", e.backhaul.dl.latency_ms}}},
                          {"ul",
                           {{"capacity_mbps", e.backhaul.ul.capacity_mbps},
                            {"latency_ms", e.backhaul.ul.latency_ms}}}};
        je["policy"] = e.policy == SetupPolicy::Accept ? "accept" : "reject";
        je["rap_bssid"] = e.rap_bssid.to_string();
        je["vap_bssid"] = e.vap_bssid.to_string();
        je["ssid"] = e.ssid;
        je["fat_clients"] = nlohmann::json::array();
        for (const auto& f : e.fat_clients)
            je["fat_clients"].push_back({{"phy_rate_mbps", f.phy_rate_mbps}, {"uplink", f.uplink}});
        j["eaps"].push_back(je);
    }
    j["stas"] = nlohmann::json::array();
    for (const auto& s : sc.stas) {
        nlohmann::json js;
        js["name"] = s.name;
        js["mac"] = s.mac.to_string();
        js["home_eap"] = s.home_eap;
        js["downlink_demand"] = s.downlink_demand;
        js["waypoints"] = nlohmann::json::array();
        for (const auto& w : s.waypoints)
            js["waypoints"].push_back({{"t_s", w.t_s}, {"position", {w.position.x, w.position.y}}});
        js["channels"] = s.channels;
        j["stas"].push_back(js);
    }
    return j;
}

} // namespace nxwlan
