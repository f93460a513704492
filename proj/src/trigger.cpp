#include "trigsim/trigger.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trigsim/errors.hpp"

namespace trigsim {

void RampPair::validate() const {
    if (Delta < 1) throw ConfigError("ramp Delta must be >= 1");
    if (!(delta_hat > 0.0 && delta_hat < 1.0))
        throw ConfigError("ramp delta_hat must lie in (0,1)");
}

double ramp_release(double tau_since, double u_k, const RampPair& r) {
    return std::max(0.0, u_k * (1.0 - tau_since / r.Delta));
}

double ramp_apply(double tau_since, double u_k, const RampPair& r) {
    const double cap = 1.0 - r.delta_hat;
    if (tau_since >= r.Delta) return cap;
    return std::min(cap, u_k + (cap - u_k) * (tau_since / r.Delta));
}

double controller_eval(double tau_since, bool window_in_S, double u_k,
                       const RampPair& r) {
    return window_in_S ? ramp_release(tau_since, u_k, r)
                       : ramp_apply(tau_since, u_k, r);
}

int xor_transition(bool a_in_S, bool b_in_S) { return a_in_S == b_in_S ? 0 : 1; }

int align_weekly(int t) { return 7 * ((t + 6) / 7); }

int apply_alignment(Alignment a, int t) {
    return a == Alignment::weekly ? align_weekly(t) : t;
}

Alignment alignment_from_tag(const std::string& tag) {
    if (tag == "identity") return Alignment::identity;
    if (tag == "weekly") return Alignment::weekly;
    throw ConfigError("unknown alignment '" + tag + "' (expected identity or weekly)");
}

std::string alignment_tag(Alignment a) {
    return a == Alignment::weekly ? "weekly" : "identity";
}

void TriggerPolicy::validate() const {
    if (hist < 0) throw ConfigError("policy tau must be >= 0");
    if (Delta < hist)
        throw ConfigError("policy violates Δ ≥ τ: Delta must be >= tau");
    ramps.validate();
    if (ramps.Delta != Delta)
        throw ConfigError("ramp saturation time must equal the policy Delta");
    if (u_ref < 0.0 || u_ref > 1.0 - ramps.delta_hat)
        throw ConfigError("u_ref must lie in [0, 1 - delta_hat]");
    indicator.validate();
    if (indicator.tau != hist)
        throw ConfigError("indicator tau must equal the policy tau");
}

bool SwitchLog::applied_at(int t) const {
    auto it = std::upper_bound(trigger_times.begin(), trigger_times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - trigger_times.begin());
    if (k == 0) throw EngineError("time precedes the first trigger time");
    return applied_on_interval(k - 1);
}

void SwitchLog::validate(int t0, int horizon, int Delta) const {
    if (trigger_times.empty() || trigger_times.front() != t0)
        throw EngineError("switch log must start at t0");
    for (std::size_t i = 1; i < trigger_times.size(); ++i) {
        if (trigger_times[i] - trigger_times[i - 1] < Delta)
            throw EngineError("switch log gap below the minimum interevent time");
        if (trigger_times[i] > horizon)
            throw EngineError("trigger time beyond horizon");
    }
}

std::vector<State> history_at(const Trajectory& traj, int t, int tau) {
    const int end = traj.t0 + static_cast<int>(traj.states.size()) - 1;
    if (t < traj.t0 || t > end) {
        std::ostringstream msg;
        msg << "history requested at t=" << t << ", trajectory covers ["
            << traj.t0 << ", " << end << "]";
        throw EngineError(msg.str());
    }
    std::vector<State> w;
    w.reserve(static_cast<std::size_t>(tau) + 1);
    for (int s = t - tau; s <= t; ++s)
        w.push_back(traj.states[static_cast<std::size_t>(std::max(s - traj.t0, 0))]);
    return w;
}

namespace {

bool member_at(const Trajectory& traj, int t, const TriggerPolicy& policy,
               const ModelSpec& m) {
    const auto w = history_at(traj, t, policy.hist);
    return in_event_set(EventSet{policy.indicator, policy.theta}, m, w);
}

// Dwell-interval continuation with the regime supplied by the caller. The
// closed loop tracks regimes by strict alternation, which matches deriving
// them from window(t_k) whenever switches are implemented at the detected
// crossing itself; calendar alignment can delay implementation past the
// crossing, and alternation is what keeps the switch log well formed there.
int dwell_interval(const ModelSpec& m, Trajectory& traj, int t_k, double u_k,
                   bool regime_in_S, const TriggerPolicy& policy, int horizon) {
    auto advance = [&](int day) {
        const double u_t = controller_eval(day - t_k, regime_in_S, u_k, policy.ramps);
        traj.controls.push_back(u_t);
        try {
            traj.states.push_back(m.step(traj.states.back(), u_t));
        } catch (const EngineError& e) {
            std::ostringstream msg;
            msg << e.what() << " (day " << day << ")";
            throw EngineError(msg.str());
        }
    };
    auto ride_out = [&](int from, int to) {
        for (int t = from; t <= to; ++t) advance(t);
    };

    for (int t = t_k; t <= horizon; ++t) {
        advance(t);
        const int tn = t + 1;
        if (tn > horizon || tn < t_k + policy.Delta) continue;
        if (xor_transition(member_at(traj, tn, policy, m), regime_in_S) == 0) continue;
        const int tstar = tn - (t_k + policy.Delta);
        const int cand = t_k + policy.Delta + apply_alignment(policy.alignment, tstar);
        if (cand < horizon) {
            ride_out(tn, cand - 1);
            return cand;
        }
        ride_out(tn, horizon);
        return horizon;
    }
    return horizon;
}

}  // namespace

int next_trigger(const ModelSpec& m, Trajectory& traj, int t_k, double u_k,
                 const TriggerPolicy& policy, int horizon) {
    const int end = traj.t0 + static_cast<int>(traj.states.size()) - 1;
    if (end != t_k)
        throw EngineError("trajectory must end exactly at the trigger time t_k");
    const bool regime = member_at(traj, t_k, policy, m);
    return dwell_interval(m, traj, t_k, u_k, regime, policy, horizon);
}

ClosedLoopResult simulate_closed_loop(const ModelSpec& m, const State& x0,
                                      const TriggerPolicy& policy, int t0,
                                      int horizon) {
    policy.validate();
    if (horizon <= t0) throw ConfigError("horizon must exceed t0");

    ClosedLoopResult res;
    Trajectory& traj = res.traj;
    traj.t0 = t0;
    traj.states.reserve(static_cast<std::size_t>(horizon - t0) + 2);
    traj.controls.reserve(static_cast<std::size_t>(horizon - t0) + 1);
    traj.states.push_back(x0);

    bool m_k = member_at(traj, t0, policy, m);
    double u_k = m_k ? 0.0 : policy.u_ref;
    int t_k = t0;
    res.log.trigger_times.push_back(t0);
    res.log.initial_applied = !m_k;

    while (true) {
        const int t_next = dwell_interval(m, traj, t_k, u_k, m_k, policy, horizon);
        if (t_next >= horizon) break;
        u_k = controller_eval(t_next - t_k, m_k, u_k, policy.ramps);
        m_k = !m_k;
        t_k = t_next;
        res.log.trigger_times.push_back(t_next);
    }

    res.indicator_values.reserve(traj.states.size());
    for (int t = t0; t <= t0 + static_cast<int>(traj.states.size()) - 1; ++t) {
        const auto w = history_at(traj, t, policy.hist);
        std::vector<double> obs;
        obs.reserve(w.size());
        for (const State& x : w)
            obs.push_back(observe(policy.indicator.observation, m, x));
        res.indicator_values.push_back(aggregate(policy.indicator.aggregator, obs));
    }
    return res;
}

}  // namespace trigsim
