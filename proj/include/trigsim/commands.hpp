#pragma once

#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "trigsim/scenario.hpp"
#include "trigsim/tradeoff.hpp"

namespace trigsim {

struct CliOptions {
    std::string scenario_path;
    std::vector<std::string> indicators;  // empty means every configured one
    bool theta_set = false;
    double theta = 0.0;
    bool target_set = false;
    double target = 0.0;
    std::string out_dir = ".";
    int grid = 0;  // 0 keeps each indicator's configured point count
    int parallel = 1;
    std::string curve_path;  // lookup input
};

struct CompareRow {
    std::string indicator_id;
    bool feasible = false;
    LookupResult lookup;  // valid when feasible
    std::string error;    // infeasibility message otherwise
};

struct CompareReport {
    double target = 0.0;
    std::string objective_label;
    std::vector<CompareRow> rows;
    std::vector<TradeOffCurve> curves;  // parallel to rows
    std::vector<std::tuple<std::string, std::string, ComparisonReport>> pairwise;
};

// The engine behind cmd_compare: sweep each indicator, look the target up
// with bisection refinement, compare the curves pairwise.
CompareReport compare_scenario(const Scenario& s,
                               const std::vector<std::string>& indicator_ids,
                               double target, int grid, int parallel);

std::string format_compare_table(const CompareReport& rep);

int cmd_simulate(const CliOptions& opt);
int cmd_sweep(const CliOptions& opt);
int cmd_compare(const CliOptions& opt);
int cmd_lookup(const CliOptions& opt);

// TRIGGER_SIM_THREADS wins over --parallel when set.
void apply_env_threads(CliOptions& opt);

// Runs fn, mapping thrown errors to the exit-code contract:
// 0 success, 2 config, 3 engine, 4 infeasible objective.
int run_guarded(const std::function<int()>& fn);

}  // namespace trigsim
