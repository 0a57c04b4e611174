// nxwlan command line: scenario runs, the two built-in experiments, and a
// one-shot steering snapshot. Emits CSV suitable for any plotting tool.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "nxwlan/nxwlan.hpp"

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("NXWLAN_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw std::runtime_error("NXWLAN_SEED: not a number");
        }
    }
    return 1;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_metrics(const std::string& out_dir, const nxwlan::Metrics& m) {
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);
    write_file(dir / "throughput.csv", nxwlan::throughput_csv(m));
    write_file(dir / "summary.csv", nxwlan::summary_csv(m));
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

int run_steer(const std::string& snapshot_path) {
    std::ifstream in(snapshot_path);
    if (!in) throw std::runtime_error("cannot open snapshot file: " + snapshot_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw nxwlan::ScenarioError(std::string("snapshot json: ") + e.what());
    }
    nxwlan::SteeringParams params;
    if (j.contains("steering")) {
        const auto& s = j.at("steering");
        params.r_all_max_mbps = s.value("r_all_max_mbps", params.r_all_max_mbps);
        params.prx_low_dbm = s.value("prx_low_dbm", params.prx_low_dbm);
        params.prx_high_dbm = s.value("prx_high_dbm", params.prx_high_dbm);
        params.ptx_client_dbm = s.value("ptx_client_dbm", params.ptx_client_dbm);
    }
    if (!j.contains("prx_preq_dbm")) throw nxwlan::ScenarioError("prx_preq_dbm: missing");
    const double prx = j.at("prx_preq_dbm").get<double>();
    nxwlan::ClientLoad load;
    for (const auto& r : j.value("home_load", nlohmann::json::array()))
        load.phy_rates_mbps.push_back(r.get<double>());
    nxwlan::BackhaulCaps home{};
    if (j.contains("home_backhaul")) {
        home.dl_mbps = j.at("home_backhaul").value("dl_mbps", 0.0);
        home.ul_mbps = j.at("home_backhaul").value("ul_mbps", 0.0);
    }
    std::map<std::string, nxwlan::BackhaulCaps> neighbors;
    if (j.contains("neighbors"))
        for (const auto& [name, caps] : j.at("neighbors").items())
            neighbors[name] = {caps.value("dl_mbps", 0.0), caps.value("ul_mbps", 0.0)};

    nxwlan::SteeringDecision d;
    try {
        d = nxwlan::calc_probe_response_tx_powers(params, prx, load, home, neighbors);
    } catch (const nxwlan::DomainError& e) {
        throw nxwlan::ScenarioError(e.what());
    }
    std::cout << "phy_rate_mbps " << fixed6(d.predicted_phy_mbps) << "\n"
              << "mac_rate_mbps " << fixed6(d.predicted_mac_mbps) << "\n"
              << "rap_dl_bh_mbps " << fixed6(d.rap_dl_bh_mbps) << "\n"
              << "rap_ul_bh_mbps " << fixed6(d.rap_ul_bh_mbps) << "\n"
              << "rap_willingness " << fixed6(d.p_star) << "\n"
              << "rap_tx_dbm " << fixed6(d.rap_tx_dbm) << "\n";
    for (const auto& [name, e] : d.vaps)
        std::cout << "vap " << name << " willingness " << fixed6(e.willingness) << " tx_dbm "
                  << fixed6(e.tx_dbm) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"neighborhood-extensible WLAN simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = ".", mode_override, snapshot_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int reps_override = 0;
    bool txop = false;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "simulation seed (default: NXWLAN_SEED or 1)")
            ->each([&](const std::string&) { seed_set = true; });
    };

    auto* run_cmd = app.add_subcommand("run", "run a scenario file");
    run_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--mode", mode_override, "override mode: baseline|nxwlan");
    run_cmd->add_option("--reps", reps_override, "override schedule repetitions");
    add_seed(run_cmd);

    auto* exp1_cmd = app.add_subcommand("exp1", "extended-coverage experiment, both modes");
    exp1_cmd->add_option("--out", out_dir, "output directory");
    exp1_cmd->add_option("--reps", reps_override, "override repetitions");
    add_seed(exp1_cmd);

    auto* exp2_cmd = app.add_subcommand("exp2", "load-balancing experiment, both modes");
    exp2_cmd->add_option("--out", out_dir, "output directory");
    exp2_cmd->add_option("--reps", reps_override, "override repetitions");
    exp2_cmd->add_flag("--txop", txop, "equal-airtime (TXOP) medium sharing");
    add_seed(exp2_cmd);

    auto* steer_cmd = app.add_subcommand("steer", "print the steering decision for a snapshot");
    steer_cmd->add_option("--snapshot", snapshot_path, "snapshot JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!seed_set) seed = default_seed();

        if (app.got_subcommand(run_cmd)) {
            nxwlan::Scenario sc = nxwlan::load_scenario(scenario_path);
            if (!mode_override.empty()) {
                if (mode_override == "baseline") sc.mode = nxwlan::SimMode::Baseline;
                else if (mode_override == "nxwlan") sc.mode = nxwlan::SimMode::Nxwlan;
                else throw nxwlan::ScenarioError("mode: expected baseline or nxwlan");
            }
            if (reps_override > 0) sc.schedule.repetitions = reps_override;
            write_metrics(out_dir, nxwlan::run(sc, seed));
        } else if (app.got_subcommand(exp1_cmd) || app.got_subcommand(exp2_cmd)) {
            nxwlan::ExperimentParams p;
            if (reps_override > 0) p.repetitions = reps_override;
            p.txop = txop;
            const int which = app.got_subcommand(exp1_cmd) ? 1 : 2;
            write_metrics(out_dir, nxwlan::run_experiment(which, seed, p));
        } else if (app.got_subcommand(steer_cmd)) {
            return run_steer(snapshot_path);
        }
        return 0;
    } catch (const nxwlan::ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
