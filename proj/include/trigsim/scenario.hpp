#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "trigsim/tradeoff.hpp"
#include "trigsim/trigger.hpp"

namespace trigsim {

// Threshold grid described by its generator so configs stay small and
// round-trip exactly.
struct DomainConfig {
    std::string kind;  // "log" | "linear"
    double lo = 0.0;
    double hi = 0.0;
    int n = 0;

    // n_override > 0 replaces the configured point count.
    ThresholdDomain materialize(int n_override = 0) const;
};

struct IndicatorConfig {
    std::string id;
    ObservationKind observation;
    Aggregator aggregator = Aggregator::mean;
    DomainConfig domain;
};

struct PolicyConfig {
    int tau = 0;
    int Delta = 1;
    double u_ref = 0.0;
    double delta_hat = 0.0;
    Alignment alignment = Alignment::identity;
};

struct OutcomesConfig {
    ObservationKind peak_observation;
    std::vector<std::string> labels;  // {objective label, compared label}
};

struct Scenario {
    std::string id;
    std::string model_id;    // "chile8" | "china9"
    std::string start_date;  // ISO date of day index 0
    int horizon_days = 0;    // final day index
    double population = 0.0;

    // When set, the transmission/transition block must be supplied by the
    // user; params_source names where the numbers have to come from.
    bool params_external_required = false;
    std::string params_source;
    std::map<std::string, double> params;

    State x0;  // model compartment order
    PolicyConfig policy;
    OutcomesConfig outcomes;
    std::vector<IndicatorConfig> indicators;

    ModelSpec make_model() const;
    const IndicatorConfig& indicator(const std::string& id) const;
    TriggerPolicy make_policy(const IndicatorConfig& ind, double theta) const;
    PolicyRun make_run(const IndicatorConfig& ind) const;
    std::chrono::sys_days start() const;
};

std::vector<std::string> compartment_names(const std::string& model_id);

// ISO yyyy-mm-dd only.
std::chrono::sys_days parse_date(const std::string& iso);
std::string format_date(std::chrono::sys_days d);

// Structural read: file/JSON into the typed config, every shape problem
// collected into one ConfigError. Does not run semantic validation.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_json(const nlohmann::json& j, const std::string& origin);

// Semantic validation; collects every violated invariant into one ConfigError.
void validate_scenario(const Scenario& s);

// parse + validate.
Scenario load_scenario(const std::string& path);

nlohmann::json serialize(const Scenario& s);

// FNV-1a 64 over the canonical (sorted-key, compact) serialization, as 16
// hex digits.
std::string config_hash(const Scenario& s);

}  // namespace trigsim
