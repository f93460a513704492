#include "trigsim/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "trigsim/csvio.hpp"
#include "trigsim/errors.hpp"

namespace trigsim {

namespace fs = std::filesystem;

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

const IndicatorConfig& single_indicator(const Scenario& s,
                                        const CliOptions& opt,
                                        const char* cmd) {
    require(opt.indicators.size() == 1,
            std::string(cmd) + " needs exactly one --indicator");
    return s.indicator(opt.indicators.front());
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string num6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string pct1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", v);
    return buf;
}

}  // namespace

void apply_env_threads(CliOptions& opt) {
    const char* env = std::getenv("TRIGGER_SIM_THREADS");
    if (!env || !*env) return;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (!end || *end != '\0' || v < 1 || v > 4096)
        throw ConfigError(
            "TRIGGER_SIM_THREADS must be a positive integer, got '" +
            std::string(env) + "'");
    opt.parallel = int(v);
}

int run_guarded(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleObjective& e) {
        std::cerr << "infeasible objective: " << e.what() << "\n";
        return 4;
    } catch (const EngineError& e) {
        std::cerr << "engine error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "engine error: " << e.what() << "\n";
        return 3;
    }
}

int cmd_simulate(const CliOptions& opt) {
    require(!opt.scenario_path.empty(), "--scenario is required");
    require(opt.theta_set, "--theta is required for simulate");
    const Scenario s = load_scenario(opt.scenario_path);
    const IndicatorConfig& ind = single_indicator(s, opt, "simulate");

    const ModelSpec model = s.make_model();
    const TriggerPolicy policy = s.make_policy(ind, opt.theta);
    const ClosedLoopResult res =
        simulate_closed_loop(model, s.x0, policy, 0, s.horizon_days);

    OutcomeVec out;
    out.labels = s.outcomes.labels;
    out.values = {outcome_peak(res.traj, s.outcomes.peak_observation, model),
                  outcome_lockdown_pct(res.log, 0, s.horizon_days)};

    const auto start = s.start();
    const std::string base = s.id + "_" + ind.id;
    const std::string traj_path = join_path(opt.out_dir, base + "_trajectory.csv");
    const std::string sw_path = join_path(opt.out_dir, base + "_switches.csv");
    write_file_atomic(traj_path, trajectory_csv(res, model, start));
    write_file_atomic(sw_path, switches_csv(res.log, start));
    const std::string man_path =
        join_path(opt.out_dir, base + "_simulate_manifest.json");
    write_manifest(man_path, make_manifest(config_hash(s), {traj_path, sw_path}));

    for (std::size_t i = 0; i < out.labels.size(); ++i)
        std::cout << out.labels[i] << " = " << fmt_double(out.values[i]) << "\n";
    std::cout << "switches = " << res.log.trigger_times.size() - 1 << "\n";
    std::cout << "wrote " << traj_path << "\n";
    std::cout << "wrote " << sw_path << "\n";
    std::cout << "wrote " << man_path << "\n";
    return 0;
}

int cmd_sweep(const CliOptions& opt) {
    require(!opt.scenario_path.empty(), "--scenario is required");
    const Scenario s = load_scenario(opt.scenario_path);
    const IndicatorConfig& ind = single_indicator(s, opt, "sweep");

    const PolicyRun run = s.make_run(ind);
    const ThresholdDomain domain = ind.domain.materialize(opt.grid);
    const TradeOffCurve curve = sweep(run, domain, opt.parallel, s.id, ind.id);

    std::size_t failed = 0;
    for (const CurvePoint& pt : curve.points)
        if (!pt.ok) ++failed;

    const std::string base = s.id + "_" + ind.id;
    const std::string csv_path = join_path(opt.out_dir, base + "_curve.csv");
    const std::string svg_path = join_path(opt.out_dir, base + "_curve.svg");
    write_file_atomic(csv_path, curve_csv(curve));
    write_file_atomic(svg_path, curve_chart_svg({curve}));
    const std::string man_path =
        join_path(opt.out_dir, base + "_sweep_manifest.json");
    write_manifest(man_path, make_manifest(config_hash(s), {csv_path, svg_path}));

    std::cout << "swept " << curve.points.size() << " thresholds (" << failed
              << " failed)\n";
    std::cout << "wrote " << csv_path << "\n";
    std::cout << "wrote " << svg_path << "\n";
    std::cout << "wrote " << man_path << "\n";
    return 0;
}

CompareReport compare_scenario(const Scenario& s,
                               const std::vector<std::string>& indicator_ids,
                               double target, int grid, int parallel) {
    std::vector<std::string> ids = indicator_ids;
    if (ids.empty())
        for (const IndicatorConfig& ind : s.indicators) ids.push_back(ind.id);

    CompareReport rep;
    rep.target = target;
    rep.objective_label =
        s.outcomes.labels.empty() ? "objective" : s.outcomes.labels.front();

    for (const std::string& id : ids) {
        const IndicatorConfig& ind = s.indicator(id);
        const PolicyRun run = s.make_run(ind);
        const TradeOffCurve curve =
            sweep(run, ind.domain.materialize(grid), parallel, s.id, ind.id);

        CompareRow row;
        row.indicator_id = id;
        try {
            row.lookup = objective_lookup(curve, target, [run](double theta) {
                const OutcomeVec o = evaluate_policy(run, theta);
                return std::pair{o.values.front(), o.values.back()};
            });
            row.feasible = true;
        } catch (const InfeasibleObjective& e) {
            row.error = e.what();
        }
        rep.rows.push_back(std::move(row));
        rep.curves.push_back(curve);
    }

    for (std::size_t i = 0; i < rep.curves.size(); ++i)
        for (std::size_t j = i + 1; j < rep.curves.size(); ++j) {
            const auto targets =
                common_objective_targets(rep.curves[i], rep.curves[j], 25);
            rep.pairwise.emplace_back(
                rep.rows[i].indicator_id, rep.rows[j].indicator_id,
                dominance(rep.curves[i], rep.curves[j], targets));
        }
    return rep;
}

std::string format_compare_table(const CompareReport& rep) {
    std::ostringstream os;
    os << "objective target: " << num6(rep.target) << " (" << rep.objective_label
       << ")\n\n";

    std::size_t wid = std::string("Indicator").size();
    for (const CompareRow& row : rep.rows)
        wid = std::max(wid, row.indicator_id.size());

    auto pad = [](const std::string& sv, std::size_t w) {
        std::string out = sv;
        while (out.size() < w) out += ' ';
        return out;
    };

    os << pad("Indicator", wid + 2) << pad("Threshold", 14) << "% in lockdown\n";
    for (const CompareRow& row : rep.rows) {
        os << pad(row.indicator_id, wid + 2);
        if (row.feasible) {
            os << pad(num6(row.lookup.theta), 14) << pct1(row.lookup.compared)
               << "\n";
        } else {
            os << pad("-", 14) << "infeasible\n";
        }
    }

    for (const CompareRow& row : rep.rows) {
        if (!row.feasible) continue;
        if (row.lookup.non_monotone)
            os << "note: " << row.indicator_id
               << ": refinement stopped short of the 1% objective tolerance\n";
    }
    os << "\n";
    for (const auto& [a, b, cmp] : rep.pairwise)
        os << "dominance " << a << " vs " << b << ": "
           << dominance_tag(cmp.verdict) << " (" << cmp.detail << ")\n";
    return os.str();
}

int cmd_compare(const CliOptions& opt) {
    require(!opt.scenario_path.empty(), "--scenario is required");
    require(opt.target_set, "--target is required for compare");
    const Scenario s = load_scenario(opt.scenario_path);

    const CompareReport rep = compare_scenario(s, opt.indicators, opt.target,
                                               opt.grid, opt.parallel);

    std::vector<std::string> outputs;
    for (const TradeOffCurve& curve : rep.curves) {
        const std::string csv_path =
            join_path(opt.out_dir, s.id + "_" + curve.indicator_id + "_curve.csv");
        write_file_atomic(csv_path, curve_csv(curve));
        outputs.push_back(csv_path);
    }
    const std::string svg_path =
        join_path(opt.out_dir, s.id + "_compare_curves.svg");
    write_file_atomic(svg_path, curve_chart_svg(rep.curves));
    outputs.push_back(svg_path);
    const std::string man_path =
        join_path(opt.out_dir, s.id + "_compare_manifest.json");
    write_manifest(man_path, make_manifest(config_hash(s), outputs));

    std::cout << format_compare_table(rep);
    for (const std::string& p : outputs) std::cout << "wrote " << p << "\n";
    std::cout << "wrote " << man_path << "\n";

    bool any_feasible = false;
    for (const CompareRow& row : rep.rows) any_feasible |= row.feasible;
    if (!any_feasible)
        throw InfeasibleObjective("no indicator reaches the objective target " +
                                  num6(opt.target));
    return 0;
}

int cmd_lookup(const CliOptions& opt) {
    require(!opt.curve_path.empty(), "lookup needs a curve CSV path");
    require(opt.target_set, "--target is required for lookup");
    const TradeOffCurve curve = read_curve_csv(opt.curve_path);
    const LookupResult r = objective_lookup(curve, opt.target);
    std::cout << "indicator,theta,lockdown_pct\n";
    std::cout << (curve.indicator_id.empty() ? "?" : curve.indicator_id) << ","
              << fmt_double(r.theta) << "," << fmt_double(r.compared) << "\n";
    return 0;
}

}  // namespace trigsim
