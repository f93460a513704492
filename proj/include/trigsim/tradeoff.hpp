#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trigsim/model.hpp"
#include "trigsim/trigger.hpp"

namespace trigsim {

struct OutcomeVec {
    std::vector<std::string> labels;
    std::vector<double> values;
};

struct ThresholdDomain {
    std::vector<double> values;  // strictly increasing, finite, nonempty

    static ThresholdDomain log_spaced(double lo, double hi, int n);
    static ThresholdDomain linear_spaced(double lo, double hi, int n);
    void validate() const;
};

struct CurvePoint {
    double theta = 0.0;
    OutcomeVec outcomes;
    bool ok = false;
    std::string error;  // set when ok is false; the point is kept, not dropped
};

struct TradeOffCurve {
    std::string scenario_id;
    std::string indicator_id;
    int tau = 0;
    int Delta = 0;
    std::vector<CurvePoint> points;  // ordered by theta
};

// P1-style outcome: max of the observation over every stored state.
double outcome_peak(const Trajectory& traj, const ObservationKind& obs,
                    const ModelSpec& m);

// Everything needed to evaluate one threshold of one indicator policy.
struct PolicyRun {
    ModelSpec model;
    State x0;
    int t0 = 0;
    int horizon = 0;
    TriggerPolicy policy;  // theta is overwritten per evaluation
    ObservationKind peak_observation;
    std::vector<std::string> outcome_labels;  // {objective label, compared label}
};

OutcomeVec evaluate_policy(const PolicyRun& run, double theta);

// One closed-loop evaluation per grid theta; failed points keep their error.
// threads <= 1 runs serially; results are ordered by theta either way.
TradeOffCurve sweep(const PolicyRun& run, const ThresholdDomain& domain,
                    int threads, const std::string& scenario_id,
                    const std::string& indicator_id);

// P2: percent of [t0, horizon] spent with the NPI applied; the final open
// interval closes at the horizon.
double outcome_lockdown_pct(const SwitchLog& log, int t0, int horizon);

struct LookupResult {
    double theta = 0.0;
    double objective = 0.0;   // outcome the bound applies to (e.g. peak)
    double compared = 0.0;    // outcome being minimized (e.g. lockdown %)
    bool refined = false;     // bisection improved on the grid point
    bool non_monotone = false;  // bracket collapsed before meeting tolerance
};

// Evaluator used for bisection refinement: theta -> (objective, compared).
using PolicyEvaluator = std::function<std::pair<double, double>(double)>;

// Grid-only lookup: best feasible grid point (objective <= target, compared
// minimized, ties broken toward larger theta). Throws InfeasibleObjective
// when no grid point qualifies.
LookupResult objective_lookup(const TradeOffCurve& curve, double target);

// With an evaluator, additionally refines theta by bisection toward
// |objective - target| <= 1% relative, keeping only feasible candidates.
LookupResult objective_lookup(const TradeOffCurve& curve, double target,
                              const PolicyEvaluator& evaluate);

enum class Dominance { a_dominates, b_dominates, crossing, incomparable };

struct TargetComparison {
    double target = 0.0;
    std::optional<double> a_compared;  // empty when infeasible for that curve
    std::optional<double> b_compared;
};

struct ComparisonReport {
    Dominance verdict = Dominance::incomparable;
    std::string detail;  // e.g. "incomparable-by-tie"
    std::vector<TargetComparison> rows;
};

// Pointwise comparison over a grid of objective targets.
ComparisonReport dominance(const TradeOffCurve& a, const TradeOffCurve& b,
                           const std::vector<double>& targets);

// n targets spanning the objective range both curves can reach; empty when
// the feasible ranges do not overlap.
std::vector<double> common_objective_targets(const TradeOffCurve& a,
                                             const TradeOffCurve& b, int n);

std::string dominance_tag(Dominance d);

}  // namespace trigsim
