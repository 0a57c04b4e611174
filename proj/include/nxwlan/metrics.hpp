#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace nxwlan {

/// One measurement epoch for one station placement.
struct MetricRow {
    std::string mode;
    double location_m = 0;   // cumulative distance along the station's walk
    int rep = 0;
    std::string serving;     // "rap:<eap>", "wtp:<host>" or "none"
    double mbps = 0;
};

struct MetricSummary {
    std::string mode;
    double location_m = 0;
    double mean_mbps = 0;
    double stderr_mbps = 0;  // standard error over repetitions
};

struct Metrics {
    std::vector<MetricRow> rows;
    std::vector<MetricSummary> summary;
};

namespace detail {
inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}
} // namespace detail

/// Mean and standard error per (mode, location), repetitions only.
inline void summarize(Metrics& m) {
    m.summary.clear();
    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    for (const auto& r : m.rows) groups[{r.mode, r.location_m}].push_back(r.mbps);
    for (const auto& [key, vals] : groups) {
        double mean = 0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0;
        if (vals.size() > 1) {
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= static_cast<double>(vals.size() - 1);
        }
        m.summary.push_back(
            {key.first, key.second, mean, std::sqrt(var / static_cast<double>(vals.size()))});
    }
}

// CSV emission is byte-stable: fixed 6-decimal formatting, no locale.

inline std::string throughput_csv(const Metrics& m) {
    std::string out = "mode,location_m,rep,serving,mbps\n";
    for (const auto& r : m.rows) {
        out += r.mode;
        out += ',';
        out += detail::fixed6(r.location_m);
        out += ',';
        out += std::to_string(r.rep);
        out += ',';
        out += r.serving;
        out += ',';
        out += detail::fixed6(r.mbps);
        out += '\n';
    }
    return out;
}

inline std::string summary_csv(const Metrics& m) {
    std::string out = "mode,location_m,mean_mbps,stderr_mbps\n";
    for (const auto& s : m.summary) {
        out += s.mode;
        out += ',';
        out += detail::fixed6(s.location_m);
        out += ',';
        out += detail::fixed6(s.mean_mbps);
        out += ',';
        out += detail::fixed6(s.stderr_mbps);
        out += '\n';
    }
    return out;
}

} // namespace nxwlan
