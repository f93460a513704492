#include "trigsim/indicators.hpp"

#include <sstream>

#include "trigsim/errors.hpp"

namespace trigsim {

namespace {

void require_model(const ObservationKind& kind, const ModelSpec& m,
                   const char* wanted) {
    if (m.id != wanted) {
        throw ConfigError("observation '" + kind.tag + "' needs model " + wanted +
                          ", scenario uses " + m.id);
    }
}

}  // namespace

double observe(const ObservationKind& kind, const ModelSpec& m, const State& x) {
    double v = 0.0;
    if (kind.tag == "chile_icu") {
        require_model(kind, m, "chile8");
        v = x[chile::Hc];
    } else if (kind.tag == "chile_active") {
        require_model(kind, m, "chile8");
        v = x[chile::I] + x[chile::H] + x[chile::Hc];
    } else if (kind.tag == "china_hospitalized") {
        require_model(kind, m, "china9");
        v = x[china::HR] + x[china::HD];
    } else if (kind.tag == "china_detected") {
        require_model(kind, m, "china9");
        v = x[china::I];
    } else if (kind.tag == "custom_linear") {
        if (kind.weights.size() != x.size()) {
            std::ostringstream msg;
            msg << "custom_linear has " << kind.weights.size()
                << " weights, state has " << x.size() << " compartments";
            throw ConfigError(msg.str());
        }
        for (std::size_t i = 0; i < x.size(); ++i) v += kind.weights[i] * x[i];
    } else {
        throw ConfigError("unknown observation tag '" + kind.tag + "'");
    }
    if (kind.per_100k) v *= 1e5 / m.N;
    return v;
}

Aggregator aggregator_from_tag(const std::string& tag) {
    if (tag == "mean") return Aggregator::mean;
    if (tag == "mean_diff") return Aggregator::mean_diff;
    if (tag == "variation_rate") return Aggregator::variation_rate;
    if (tag == "variation_rate_diff") return Aggregator::variation_rate_diff;
    throw ConfigError("unknown aggregator tag '" + tag + "'");
}

std::string aggregator_tag(Aggregator a) {
    switch (a) {
        case Aggregator::mean: return "mean";
        case Aggregator::mean_diff: return "mean_diff";
        case Aggregator::variation_rate: return "variation_rate";
        case Aggregator::variation_rate_diff: return "variation_rate_diff";
    }
    return "?";
}

double ind_mean(std::span<const double> w) {
    double s = 0.0;
    for (double v : w) s += v;
    return s / static_cast<double>(w.size());
}

double ind_mean_diff(std::span<const double> w) {
    return (w.back() - w.front()) / static_cast<double>(w.size());
}

double ind_variation_rate(std::span<const double> w) {
    if (w.front() == 0.0)
        throw EngineError("variation_rate division by zero: window starts at 0");
    return (w.back() - w.front()) / w.front();
}

// Mean of the day-by-day variation rates the window can express. A tau+1
// window yields tau consecutive ratios.
double ind_variation_rate_diff(std::span<const double> w) {
    const std::size_t n = w.size();
    double s = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        if (w[i - 1] == 0.0)
            throw EngineError("variation_rate_diff division by zero inside window");
        s += (w[i] - w[i - 1]) / w[i - 1];
    }
    return s / static_cast<double>(n - 1);
}

double aggregate(Aggregator a, std::span<const double> w) {
    switch (a) {
        case Aggregator::mean: return ind_mean(w);
        case Aggregator::mean_diff: return ind_mean_diff(w);
        case Aggregator::variation_rate: return ind_variation_rate(w);
        case Aggregator::variation_rate_diff: return ind_variation_rate_diff(w);
    }
    throw EngineError("unreachable aggregator");
}

void IndicatorSpec::validate() const {
    if (tau < 0) throw ConfigError("indicator tau must be >= 0");
    if ((aggregator == Aggregator::variation_rate ||
         aggregator == Aggregator::variation_rate_diff) &&
        tau < 1) {
        throw ConfigError("variation-rate aggregators need tau >= 1");
    }
}

bool in_event_set(const EventSet& es, const ModelSpec& m,
                  std::span<const State> window) {
    const std::size_t want = static_cast<std::size_t>(es.indicator.tau) + 1;
    if (window.size() != want) {
        std::ostringstream msg;
        msg << "window has " << window.size() << " states, indicator needs " << want;
        throw EngineError(msg.str());
    }
    std::vector<double> obs;
    obs.reserve(window.size());
    for (const State& x : window) obs.push_back(observe(es.indicator.observation, m, x));
    return aggregate(es.indicator.aggregator, obs) <= es.theta;
}

}  // namespace trigsim
