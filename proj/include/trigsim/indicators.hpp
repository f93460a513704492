#pragma once

#include <span>
#include <string>
#include <vector>

#include "trigsim/model.hpp"

namespace trigsim {

// Instantaneous observation of one state. Built-in tags pick named
// compartment combinations; custom_linear takes a weight per compartment.
// per_100k rescales the value by 100000/N.
struct ObservationKind {
    std::string tag;  // chile_icu | chile_active | china_hospitalized |
                      // china_detected | custom_linear
    std::vector<double> weights;  // custom_linear only
    bool per_100k = false;
};

double observe(const ObservationKind& kind, const ModelSpec& m, const State& x);

enum class Aggregator { mean, mean_diff, variation_rate, variation_rate_diff };

Aggregator aggregator_from_tag(const std::string& tag);
std::string aggregator_tag(Aggregator a);

// Window aggregators over tau+1 observation values, oldest first.
double ind_mean(std::span<const double> w);
double ind_mean_diff(std::span<const double> w);
double ind_variation_rate(std::span<const double> w);
double ind_variation_rate_diff(std::span<const double> w);
double aggregate(Aggregator a, std::span<const double> w);

struct IndicatorSpec {
    ObservationKind observation;
    Aggregator aggregator = Aggregator::mean;
    int tau = 0;

    void validate() const;  // tau >= 0; variation forms need tau >= 1
};

struct EventSet {
    IndicatorSpec indicator;
    double theta = 0.0;
};

// Membership is inclusive: indicator value <= theta means the window sits on
// the released side of the event set.
bool in_event_set(const EventSet& es, const ModelSpec& m,
                  std::span<const State> window);

}  // namespace trigsim
