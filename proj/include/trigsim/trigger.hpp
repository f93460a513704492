#pragma once

#include <span>
#include <vector>

#include "trigsim/indicators.hpp"
#include "trigsim/model.hpp"

namespace trigsim {

struct RampPair {
    int Delta = 1;           // saturation time = minimum interevent time
    double delta_hat = 0.0;  // control ceiling is 1 - delta_hat

    void validate() const;  // Delta >= 1, delta_hat in (0,1)
};

// u-hat-minus: fade the NPI out, reaching 0 at tau_since = Delta.
double ramp_release(double tau_since, double u_k, const RampPair& r);
// u-hat-plus: fade the NPI in, reaching 1 - delta_hat at tau_since = Delta.
double ramp_apply(double tau_since, double u_k, const RampPair& r);

// Picks the ramp by which side of the event set the anchor window is on.
double controller_eval(double tau_since, bool window_in_S, double u_k,
                       const RampPair& r);

// 0 when both windows sit on the same side of the event set, 1 otherwise.
int xor_transition(bool a_in_S, bool b_in_S);

enum class Alignment { identity, weekly };

// 7 * ceil(t / 7).
int align_weekly(int t);
int apply_alignment(Alignment a, int t);

Alignment alignment_from_tag(const std::string& tag);
std::string alignment_tag(Alignment a);

struct TriggerPolicy {
    int hist = 0;   // tau, observation window length
    int Delta = 1;  // minimum interevent time, >= hist
    IndicatorSpec indicator;
    double theta = 0.0;
    double u_ref = 0.0;
    RampPair ramps;
    Alignment alignment = Alignment::identity;

    void validate() const;
};

// Trigger times t0 < t1 < ... plus the regime on the first interval; the
// regime strictly alternates from there.
struct SwitchLog {
    std::vector<int> trigger_times;
    bool initial_applied = false;

    // Regime of the interval [t_k, t_{k+1}).
    bool applied_on_interval(std::size_t k) const {
        return (k % 2 == 0) ? initial_applied : !initial_applied;
    }
    // Regime of the interval containing day t (final interval open-ended).
    bool applied_at(int t) const;

    void validate(int t0, int horizon, int Delta) const;
};

// Window of tau+1 states ending at t, left-padded with x0 while t - tau
// reaches before t0.
std::vector<State> history_at(const Trajectory& traj, int t, int tau);

struct ClosedLoopResult {
    Trajectory traj;
    SwitchLog log;
    // Indicator value at each t in [t0, horizon+1], padded-window convention.
    std::vector<double> indicator_values;
};

// Continuation of one dwell interval: simulate forward from the trajectory's
// current end under the regime fixed at t_k, watching for the first
// membership transition from t_k + Delta on. Returns the next trigger time,
// or horizon when no transition lands strictly before it.
int next_trigger(const ModelSpec& m, Trajectory& traj, int t_k, double u_k,
                 const TriggerPolicy& policy, int horizon);

ClosedLoopResult simulate_closed_loop(const ModelSpec& m, const State& x0,
                                      const TriggerPolicy& policy, int t0,
                                      int horizon);

}  // namespace trigsim
