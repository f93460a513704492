#include "trigsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "trigsim/errors.hpp"
#include "trigsim/indicators.hpp"

namespace trigsim {

using nlohmann::json;

namespace {

constexpr const char* kChileParamKeys[] = {
    "beta_E",  "beta_Im", "beta_I",  "gamma_E", "gamma_Im", "gamma_I", "gamma_H",
    "gamma_Hc", "phi_EI",  "phi_IR",  "phi_HR",  "phi_HD",   "phi_HcD"};

constexpr const char* kChinaParamKeys[] = {
    "beta_E",  "beta_I",  "beta_Iu",  "beta_HR",  "beta_HD",  "gamma_E",
    "gamma_I", "gamma_Iu", "gamma_HR", "gamma_HD", "phi_IHR",  "phi_IHD"};

struct Collector {
    std::string origin;
    std::vector<std::string> errs;

    void add(const std::string& m) { errs.push_back(m); }
    void raise_if_any() const {
        if (errs.empty()) return;
        std::ostringstream os;
        os << origin << ": ";
        for (std::size_t i = 0; i < errs.size(); ++i) {
            if (i) os << "; ";
            os << errs[i];
        }
        throw ConfigError(os.str());
    }
};

const json* want(const json& j, const char* key, Collector& c,
                 const std::string& scope) {
    if (!j.is_object() || !j.contains(key)) {
        c.add(scope + key + ": missing");
        return nullptr;
    }
    return &j.at(key);
}

std::string want_str(const json& j, const char* key, Collector& c,
                     const std::string& scope) {
    const json* v = want(j, key, c, scope);
    if (!v) return {};
    if (!v->is_string()) {
        c.add(scope + key + ": expected a string");
        return {};
    }
    return v->get<std::string>();
}

double want_num(const json& j, const char* key, Collector& c,
                const std::string& scope) {
    const json* v = want(j, key, c, scope);
    if (!v) return 0.0;
    if (!v->is_number()) {
        c.add(scope + key + ": expected a number");
        return 0.0;
    }
    return v->get<double>();
}

int want_int(const json& j, const char* key, Collector& c,
             const std::string& scope) {
    const json* v = want(j, key, c, scope);
    if (!v) return 0;
    if (!v->is_number_integer()) {
        c.add(scope + key + ": expected an integer");
        return 0;
    }
    return v->get<int>();
}

ObservationKind parse_observation(const json& v, Collector& c,
                                  const std::string& at) {
    ObservationKind k;
    if (v.is_string()) {
        k.tag = v.get<std::string>();
        return k;
    }
    if (!v.is_object()) {
        c.add(at + ": expected an observation tag or object");
        return k;
    }
    k.tag = want_str(v, "tag", c, at + ".");
    if (v.contains("per_100k")) {
        if (!v.at("per_100k").is_boolean())
            c.add(at + ".per_100k: expected a boolean");
        else
            k.per_100k = v.at("per_100k").get<bool>();
    }
    if (v.contains("weights")) {
        const json& w = v.at("weights");
        if (!w.is_array()) {
            c.add(at + ".weights: expected an array of numbers");
        } else {
            for (const auto& e : w) {
                if (!e.is_number()) {
                    c.add(at + ".weights: expected an array of numbers");
                    k.weights.clear();
                    break;
                }
                k.weights.push_back(e.get<double>());
            }
        }
    }
    return k;
}

json observation_json(const ObservationKind& k) {
    json v;
    v["tag"] = k.tag;
    v["per_100k"] = k.per_100k;
    if (!k.weights.empty()) v["weights"] = k.weights;
    return v;
}

// Tag sanity plus tag/model compatibility; weights checked for custom_linear.
void check_observation(const ObservationKind& k, const std::string& model_id,
                       std::size_t ncomp, Collector& c, const std::string& at) {
    static const std::set<std::string> kTags = {
        "chile_icu", "chile_active", "china_hospitalized", "china_detected",
        "custom_linear"};
    if (!kTags.count(k.tag)) {
        c.add(at + ": unknown observation tag '" + k.tag + "'");
        return;
    }
    if (k.tag == "custom_linear") {
        if (k.weights.size() != ncomp)
            c.add(at + ": custom_linear needs one weight per compartment");
        for (double w : k.weights)
            if (!std::isfinite(w)) {
                c.add(at + ": custom_linear weights must be finite");
                break;
            }
    } else if (!k.weights.empty()) {
        c.add(at + ": weights are only valid with custom_linear");
    }
    const bool chile_tag = k.tag.rfind("chile_", 0) == 0;
    const bool china_tag = k.tag.rfind("china_", 0) == 0;
    if ((chile_tag && model_id != "chile8") || (china_tag && model_id != "china9"))
        c.add(at + ": observation '" + k.tag + "' does not fit model " + model_id);
}

template <std::size_t M>
void collect_params(const Scenario& s, const char* const (&keys)[M],
                    Collector& c) {
    for (const char* k : keys)
        if (!s.params.count(k)) c.add(std::string("params.") + k + ": missing");
    std::set<std::string> known(std::begin(keys), std::end(keys));
    for (const auto& [k, v] : s.params) {
        if (!known.count(k)) c.add("params." + k + ": unknown parameter");
        if (!std::isfinite(v)) c.add("params." + k + ": must be finite");
    }
}

ChileParams assemble_chile(const Scenario& s) {
    ChileParams p;
    auto get = [&](const char* k) {
        auto it = s.params.find(k);
        return it == s.params.end() ? 0.0 : it->second;
    };
    p.beta_E = get("beta_E");
    p.beta_Im = get("beta_Im");
    p.beta_I = get("beta_I");
    p.gamma_E = get("gamma_E");
    p.gamma_Im = get("gamma_Im");
    p.gamma_I = get("gamma_I");
    p.gamma_H = get("gamma_H");
    p.gamma_Hc = get("gamma_Hc");
    p.phi_EI = get("phi_EI");
    p.phi_IR = get("phi_IR");
    p.phi_HR = get("phi_HR");
    p.phi_HD = get("phi_HD");
    p.phi_HcD = get("phi_HcD");
    p.delta_hat = s.policy.delta_hat;
    p.N = s.population;
    return p;
}

ChinaParams assemble_china(const Scenario& s) {
    ChinaParams p;
    auto get = [&](const char* k) {
        auto it = s.params.find(k);
        return it == s.params.end() ? 0.0 : it->second;
    };
    p.beta_E = get("beta_E");
    p.beta_I = get("beta_I");
    p.beta_Iu = get("beta_Iu");
    p.beta_HR = get("beta_HR");
    p.beta_HD = get("beta_HD");
    p.gamma_E = get("gamma_E");
    p.gamma_I = get("gamma_I");
    p.gamma_Iu = get("gamma_Iu");
    p.gamma_HR = get("gamma_HR");
    p.gamma_HD = get("gamma_HD");
    p.phi_IHR = get("phi_IHR");
    p.phi_IHD = get("phi_IHD");
    p.delta_hat = s.policy.delta_hat;
    p.N = s.population;
    return p;
}

void external_params_error(const Scenario& s, Collector& c) {
    std::string msg =
        "params: this scenario ships without transmission/transition rates; "
        "they must be supplied from an external source";
    if (!s.params_source.empty()) msg += " (" + s.params_source + ")";
    c.add(msg);
}

}  // namespace

ThresholdDomain DomainConfig::materialize(int n_override) const {
    const int count = n_override > 0 ? n_override : n;
    if (kind == "log") return ThresholdDomain::log_spaced(lo, hi, count);
    if (kind == "linear") return ThresholdDomain::linear_spaced(lo, hi, count);
    throw ConfigError("unknown domain kind '" + kind + "' (expected log or linear)");
}

std::vector<std::string> compartment_names(const std::string& model_id) {
    if (model_id == "chile8")
        return {"S", "E", "Im", "I", "R", "H", "Hc", "D"};
    if (model_id == "china9")
        return {"S", "E", "I", "Iu", "HR", "HD", "Rd", "Ru", "D"};
    throw ConfigError("unknown model '" + model_id +
                      "' (expected chile8 or china9)");
}

std::chrono::sys_days parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    if (iso.size() != 10 ||
        std::sscanf(iso.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3)
        throw ConfigError("bad date '" + iso + "': expected yyyy-mm-dd");
    const std::chrono::year_month_day ymd{std::chrono::year{y},
                                          std::chrono::month{unsigned(m)},
                                          std::chrono::day{unsigned(d)}};
    if (!ymd.ok())
        throw ConfigError("bad date '" + iso + "': not a calendar date");
    return std::chrono::sys_days{ymd};
}

std::string format_date(std::chrono::sys_days t) {
    const std::chrono::year_month_day ymd{t};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

Scenario parse_scenario_json(const json& j, const std::string& origin) {
    Collector c{origin, {}};
    Scenario s;
    if (!j.is_object()) {
        c.add("top level: expected an object");
        c.raise_if_any();
    }

    s.id = want_str(j, "id", c, "");
    s.model_id = want_str(j, "model", c, "");
    s.start_date = want_str(j, "start_date", c, "");
    s.horizon_days = want_int(j, "horizon_days", c, "");
    s.population = want_num(j, "population", c, "");

    if (const json* p = want(j, "params", c, "")) {
        if (!p->is_object()) {
            c.add("params: expected an object");
        } else {
            for (const auto& [k, v] : p->items()) {
                if (k == "external_required") {
                    if (!v.is_boolean())
                        c.add("params.external_required: expected a boolean");
                    else
                        s.params_external_required = v.get<bool>();
                } else if (k == "source") {
                    if (!v.is_string())
                        c.add("params.source: expected a string");
                    else
                        s.params_source = v.get<std::string>();
                } else if (!v.is_number()) {
                    c.add("params." + k + ": expected a number");
                } else {
                    s.params[k] = v.get<double>();
                }
            }
        }
    }

    std::vector<std::string> comps;
    try {
        comps = compartment_names(s.model_id);
    } catch (const ConfigError& e) {
        c.add(e.what());
    }
    if (const json* init = want(j, "initial", c, "")) {
        if (!init->is_object()) {
            c.add("initial: expected an object");
        } else if (!comps.empty()) {
            s.x0.assign(comps.size(), 0.0);
            for (std::size_t i = 0; i < comps.size(); ++i)
                s.x0[i] = want_num(*init, comps[i].c_str(), c, "initial.");
            for (const auto& [k, v] : init->items()) {
                (void)v;
                if (std::find(comps.begin(), comps.end(), k) == comps.end())
                    c.add("initial." + k + ": not a compartment of " + s.model_id);
            }
        }
    }

    if (const json* pol = want(j, "policy", c, "")) {
        if (!pol->is_object()) {
            c.add("policy: expected an object");
        } else {
            s.policy.tau = want_int(*pol, "tau", c, "policy.");
            s.policy.Delta = want_int(*pol, "Delta", c, "policy.");
            s.policy.u_ref = want_num(*pol, "u_ref", c, "policy.");
            s.policy.delta_hat = want_num(*pol, "delta_hat", c, "policy.");
            if (pol->contains("alignment")) {
                try {
                    s.policy.alignment = alignment_from_tag(
                        want_str(*pol, "alignment", c, "policy."));
                } catch (const ConfigError& e) {
                    c.add(std::string("policy.alignment: ") + e.what());
                }
            }
        }
    }

    if (const json* out = want(j, "outcomes", c, "")) {
        if (!out->is_object()) {
            c.add("outcomes: expected an object");
        } else {
            if (const json* po = want(*out, "peak_observation", c, "outcomes."))
                s.outcomes.peak_observation =
                    parse_observation(*po, c, "outcomes.peak_observation");
            if (const json* lab = want(*out, "labels", c, "outcomes.")) {
                if (!lab->is_array()) {
                    c.add("outcomes.labels: expected an array of strings");
                } else {
                    for (const auto& e : *lab) {
                        if (!e.is_string()) {
                            c.add("outcomes.labels: expected an array of strings");
                            s.outcomes.labels.clear();
                            break;
                        }
                        s.outcomes.labels.push_back(e.get<std::string>());
                    }
                }
            }
        }
    }

    if (const json* inds = want(j, "indicators", c, "")) {
        if (!inds->is_array()) {
            c.add("indicators: expected an array");
        } else {
            for (std::size_t i = 0; i < inds->size(); ++i) {
                const json& ji = inds->at(i);
                std::ostringstream scope;
                scope << "indicators[" << i << "]";
                const std::string at = scope.str();
                if (!ji.is_object()) {
                    c.add(at + ": expected an object");
                    continue;
                }
                IndicatorConfig ind;
                ind.id = want_str(ji, "id", c, at + ".");
                if (const json* obs = want(ji, "observation", c, at + "."))
                    ind.observation =
                        parse_observation(*obs, c, at + ".observation");
                const std::string agg = want_str(ji, "aggregator", c, at + ".");
                if (!agg.empty()) {
                    try {
                        ind.aggregator = aggregator_from_tag(agg);
                    } catch (const ConfigError& e) {
                        c.add(at + ".aggregator: " + e.what());
                    }
                }
                if (const json* dom = want(ji, "domain", c, at + ".")) {
                    if (!dom->is_object()) {
                        c.add(at + ".domain: expected an object");
                    } else {
                        ind.domain.kind =
                            want_str(*dom, "kind", c, at + ".domain.");
                        ind.domain.lo = want_num(*dom, "lo", c, at + ".domain.");
                        ind.domain.hi = want_num(*dom, "hi", c, at + ".domain.");
                        ind.domain.n = want_int(*dom, "n", c, at + ".domain.");
                    }
                }
                s.indicators.push_back(std::move(ind));
            }
        }
    }

    c.raise_if_any();
    return s;
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream os;
        os << path << ":" << line << ":" << col << ": " << e.what();
        throw ConfigError(os.str());
    }
    return parse_scenario_json(j, path);
}

void validate_scenario(const Scenario& s) {
    Collector c{s.id.empty() ? std::string("scenario") : "scenario " + s.id, {}};

    if (s.id.empty()) c.add("id: must not be empty");
    std::size_t ncomp = 0;
    try {
        ncomp = compartment_names(s.model_id).size();
    } catch (const ConfigError& e) {
        c.add(e.what());
    }
    try {
        parse_date(s.start_date);
    } catch (const ConfigError& e) {
        c.add(std::string("start_date: ") + e.what());
    }
    if (s.horizon_days < 1) c.add("horizon_days: must be >= 1");
    if (!(s.population > 0.0)) c.add("population: must be positive");

    if (s.policy.tau < 0) c.add("policy.tau: must be >= 0");
    if (s.policy.Delta < 1) c.add("policy.Delta: must be >= 1");
    if (s.policy.Delta < s.policy.tau)
        c.add("policy violates Δ ≥ τ: Delta must be >= tau");
    if (!(s.policy.delta_hat > 0.0 && s.policy.delta_hat < 1.0))
        c.add("policy.delta_hat: must lie in (0,1)");
    else if (s.policy.u_ref < 0.0 || s.policy.u_ref > 1.0 - s.policy.delta_hat)
        c.add("policy.u_ref: must lie in [0, 1 - delta_hat]");

    if (s.params_external_required) {
        external_params_error(s, c);
    } else if (ncomp != 0) {
        const std::size_t before = c.errs.size();
        if (s.model_id == "chile8")
            collect_params(s, kChileParamKeys, c);
        else
            collect_params(s, kChinaParamKeys, c);
        if (c.errs.size() == before) {
            try {
                if (s.model_id == "chile8")
                    assemble_chile(s).validate();
                else
                    assemble_china(s).validate();
            } catch (const ConfigError& e) {
                c.add(std::string("params: ") + e.what());
            }
        }
    }

    if (ncomp != 0) {
        if (s.x0.size() != ncomp) {
            c.add("initial: wrong number of compartments");
        } else {
            double sum = 0.0;
            for (std::size_t i = 0; i < s.x0.size(); ++i) {
                if (!(s.x0[i] >= 0.0) || !std::isfinite(s.x0[i]))
                    c.add("initial." + compartment_names(s.model_id)[i] +
                          ": must be a nonnegative number");
                sum += s.x0[i];
            }
            if (s.population > 0.0 &&
                std::abs(sum - s.population) > 1e-9 * s.population)
                c.add("initial: compartments must sum to the population");
        }

        check_observation(s.outcomes.peak_observation, s.model_id, ncomp, c,
                          "outcomes.peak_observation");
    }
    if (s.outcomes.labels.size() != 2)
        c.add("outcomes.labels: need exactly two labels (objective, compared)");

    if (s.indicators.empty()) c.add("indicators: need at least one");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < s.indicators.size(); ++i) {
        const IndicatorConfig& ind = s.indicators[i];
        std::ostringstream scope;
        scope << "indicators[" << i << "]";
        const std::string at = scope.str();
        if (ind.id.empty()) c.add(at + ".id: must not be empty");
        if (!seen.insert(ind.id).second)
            c.add(at + ".id: duplicate indicator id '" + ind.id + "'");
        if (ncomp != 0)
            check_observation(ind.observation, s.model_id, ncomp, c,
                              at + ".observation");
        if ((ind.aggregator == Aggregator::variation_rate ||
             ind.aggregator == Aggregator::variation_rate_diff) &&
            s.policy.tau < 1)
            c.add(at + ": variation-rate aggregators need policy.tau >= 1");
        if (ind.domain.kind != "log" && ind.domain.kind != "linear")
            c.add(at + ".domain.kind: expected log or linear");
        else if (ind.domain.kind == "log" && !(ind.domain.lo > 0.0))
            c.add(at + ".domain.lo: log domains need lo > 0");
        if (!(ind.domain.lo < ind.domain.hi))
            c.add(at + ".domain: needs lo < hi");
        if (ind.domain.n < 2) c.add(at + ".domain.n: must be >= 2");
    }

    c.raise_if_any();
}

Scenario load_scenario(const std::string& path) {
    Scenario s = parse_scenario(path);
    validate_scenario(s);
    return s;
}

ModelSpec Scenario::make_model() const {
    if (params_external_required) {
        Collector c{"scenario " + id, {}};
        external_params_error(*this, c);
        c.raise_if_any();
    }
    if (model_id == "chile8") {
        ChileParams p = assemble_chile(*this);
        p.validate();
        return make_chile_model(p);
    }
    if (model_id == "china9") {
        ChinaParams p = assemble_china(*this);
        p.validate();
        return make_china_model(p);
    }
    throw ConfigError("unknown model '" + model_id + "'");
}

const IndicatorConfig& Scenario::indicator(const std::string& ind_id) const {
    for (const IndicatorConfig& ind : indicators)
        if (ind.id == ind_id) return ind;
    std::ostringstream os;
    os << "scenario " << id << " has no indicator '" << ind_id << "' (have:";
    for (const IndicatorConfig& ind : indicators) os << " " << ind.id;
    os << ")";
    throw ConfigError(os.str());
}

TriggerPolicy Scenario::make_policy(const IndicatorConfig& ind,
                                    double theta) const {
    TriggerPolicy p;
    p.hist = policy.tau;
    p.Delta = policy.Delta;
    p.indicator = IndicatorSpec{ind.observation, ind.aggregator, policy.tau};
    p.theta = theta;
    p.u_ref = policy.u_ref;
    p.ramps = RampPair{policy.Delta, policy.delta_hat};
    p.alignment = policy.alignment;
    return p;
}

PolicyRun Scenario::make_run(const IndicatorConfig& ind) const {
    PolicyRun run;
    run.model = make_model();
    run.x0 = x0;
    run.t0 = 0;
    run.horizon = horizon_days;
    run.policy = make_policy(ind, 0.0);
    run.peak_observation = outcomes.peak_observation;
    run.outcome_labels = outcomes.labels;
    return run;
}

std::chrono::sys_days Scenario::start() const { return parse_date(start_date); }

json serialize(const Scenario& s) {
    json j;
    j["id"] = s.id;
    j["model"] = s.model_id;
    j["start_date"] = s.start_date;
    j["horizon_days"] = s.horizon_days;
    j["population"] = s.population;

    json p = json::object();
    if (s.params_external_required) {
        p["external_required"] = true;
        if (!s.params_source.empty()) p["source"] = s.params_source;
    }
    for (const auto& [k, v] : s.params) p[k] = v;
    j["params"] = p;

    json init = json::object();
    const std::vector<std::string> comps = compartment_names(s.model_id);
    for (std::size_t i = 0; i < comps.size() && i < s.x0.size(); ++i)
        init[comps[i]] = s.x0[i];
    j["initial"] = init;

    j["policy"] = {{"tau", s.policy.tau},
                   {"Delta", s.policy.Delta},
                   {"u_ref", s.policy.u_ref},
                   {"delta_hat", s.policy.delta_hat},
                   {"alignment", alignment_tag(s.policy.alignment)}};

    j["outcomes"] = {
        {"peak_observation", observation_json(s.outcomes.peak_observation)},
        {"labels", s.outcomes.labels}};

    json inds = json::array();
    for (const IndicatorConfig& ind : s.indicators) {
        json ji;
        ji["id"] = ind.id;
        ji["observation"] = observation_json(ind.observation);
        ji["aggregator"] = aggregator_tag(ind.aggregator);
        ji["domain"] = {{"kind", ind.domain.kind},
                        {"lo", ind.domain.lo},
                        {"hi", ind.domain.hi},
                        {"n", ind.domain.n}};
        inds.push_back(ji);
    }
    j["indicators"] = inds;
    return j;
}

std::string config_hash(const Scenario& s) {
    const std::string dump = serialize(s).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace trigsim
