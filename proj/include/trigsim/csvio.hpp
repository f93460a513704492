#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "trigsim/tradeoff.hpp"
#include "trigsim/trigger.hpp"

namespace trigsim {

// Shortest text that parses back to exactly the same double, '.' separator.
std::string fmt_double(double x);

// Write-then-rename so readers never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

struct RunManifest {
    std::string config_hash;
    std::string engine_version;
    std::string timestamp;  // ISO 8601 UTC
    std::vector<std::string> outputs;
};

RunManifest make_manifest(const std::string& config_hash,
                          std::vector<std::string> outputs);
void write_manifest(const std::string& path, const RunManifest& m);

// `# key: value` metadata lines, then `theta,<labels...>,status`.
std::string curve_csv(const TradeOffCurve& curve);
TradeOffCurve read_curve_csv(const std::string& path);

// `t,date,<compartments...>,u,indicator,regime`; the final state row has no
// control, so u and regime stay empty there.
std::string trajectory_csv(const ClosedLoopResult& res, const ModelSpec& m,
                           std::chrono::sys_days start);

// `k,t,date,regime`: one row per trigger time, regime of [t_k, t_{k+1}).
std::string switches_csv(const SwitchLog& log, std::chrono::sys_days start);

// Decorative trade-off chart (compared vs objective per curve); never
// load-bearing.
std::string curve_chart_svg(const std::vector<TradeOffCurve>& curves);

}  // namespace trigsim
