#include <CLI11.hpp>

#include "trigsim/commands.hpp"
#include "trigsim/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Event-triggered NPI lockdown policy simulator"};
    app.set_version_flag("--version", trigsim::kEngineVersion);
    app.require_subcommand(1);

    trigsim::CliOptions opt;

    auto add_scenario = [&](CLI::App* sub) {
        sub->add_option("--scenario", opt.scenario_path, "Scenario file")
            ->required()
            ->check(CLI::ExistingFile);
    };
    auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", opt.out_dir, "Output directory")
            ->capture_default_str();
    };
    auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--grid", opt.grid,
                        "Threshold grid size (0 keeps the configured size)")
            ->check(CLI::Range(0, 100000));
    };
    auto add_parallel = [&](CLI::App* sub) {
        sub->add_option("--parallel", opt.parallel, "Sweep worker threads")
            ->check(CLI::Range(1, 4096));
    };

    CLI::App* sim = app.add_subcommand(
        "simulate", "Run one closed-loop policy, write trajectory and switches");
    add_scenario(sim);
    sim->add_option("--indicator", opt.indicators, "Indicator id")->required();
    sim->add_option("--theta", opt.theta, "Trigger threshold")->required();
    add_out(sim);

    CLI::App* swp = app.add_subcommand(
        "sweep", "Evaluate one indicator over its threshold grid");
    add_scenario(swp);
    swp->add_option("--indicator", opt.indicators, "Indicator id")->required();
    add_out(swp);
    add_grid(swp);
    add_parallel(swp);

    CLI::App* cmp = app.add_subcommand(
        "compare",
        "Look an objective target up across indicators and rank them");
    add_scenario(cmp);
    cmp->add_option("--indicator", opt.indicators,
                    "Indicator ids (default: all configured)");
    cmp->add_option("--target", opt.target, "Objective target")->required();
    add_out(cmp);
    add_grid(cmp);
    add_parallel(cmp);

    CLI::App* lku = app.add_subcommand(
        "lookup", "Find the best threshold for a target in a sweep CSV");
    lku->add_option("curve", opt.curve_path, "Curve CSV written by sweep")
        ->required()
        ->check(CLI::ExistingFile);
    lku->add_option("--target", opt.target, "Objective target")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    opt.theta_set = sim->count("--theta") > 0;
    opt.target_set = cmp->count("--target") > 0 || lku->count("--target") > 0;

    return trigsim::run_guarded([&] {
        trigsim::apply_env_threads(opt);
        if (sim->parsed()) return trigsim::cmd_simulate(opt);
        if (swp->parsed()) return trigsim::cmd_sweep(opt);
        if (cmp->parsed()) return trigsim::cmd_compare(opt);
        return trigsim::cmd_lookup(opt);
    });
}
