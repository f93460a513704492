#include "trigsim/tradeoff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "trigsim/errors.hpp"
#include "trigsim/indicators.hpp"

namespace trigsim {

ThresholdDomain ThresholdDomain::log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw ConfigError("log threshold domain needs 0 < lo < hi and n >= 2");
    ThresholdDomain d;
    d.values.reserve(static_cast<std::size_t>(n));
    const double r = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) d.values.push_back(lo * std::exp(r * i));
    d.values.back() = hi;
    return d;
}

ThresholdDomain ThresholdDomain::linear_spaced(double lo, double hi, int n) {
    if (!(hi > lo) || n < 2)
        throw ConfigError("linear threshold domain needs lo < hi and n >= 2");
    ThresholdDomain d;
    d.values.reserve(static_cast<std::size_t>(n));
    const double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) d.values.push_back(lo + h * i);
    d.values.back() = hi;
    return d;
}

void ThresholdDomain::validate() const {
    if (values.empty()) throw ConfigError("threshold domain is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw ConfigError("threshold domain contains a non-finite value");
        if (i > 0 && values[i] <= values[i - 1])
            throw ConfigError("threshold domain must be strictly increasing");
    }
}

double outcome_peak(const Trajectory& traj, const ObservationKind& obs,
                    const ModelSpec& m) {
    if (traj.states.empty()) throw EngineError("empty trajectory has no peak");
    double best = observe(obs, m, traj.states.front());
    for (std::size_t i = 1; i < traj.states.size(); ++i)
        best = std::max(best, observe(obs, m, traj.states[i]));
    return best;
}

double outcome_lockdown_pct(const SwitchLog& log, int t0, int horizon) {
    if (log.trigger_times.empty() || log.trigger_times.front() != t0)
        throw EngineError("switch log must start at t0");
    double days = 0.0;
    for (std::size_t k = 0; k < log.trigger_times.size(); ++k) {
        const int start = log.trigger_times[k];
        const int end = (k + 1 < log.trigger_times.size()) ? log.trigger_times[k + 1]
                                                           : horizon;
        if (end < start) throw EngineError("switch log times must be increasing");
        if (log.applied_on_interval(k)) days += end - start;
    }
    return 100.0 * days / (horizon - t0);
}

namespace {

// Lower compared value wins; ties prefer the larger (laxer) threshold.
bool better(double compared, double theta, double best_compared, double best_theta) {
    if (compared != best_compared) return compared < best_compared;
    return theta > best_theta;
}

LookupResult best_grid_point(const TradeOffCurve& curve, double target,
                             std::size_t* index_out) {
    if (curve.points.empty()) throw ConfigError("trade-off curve is empty");
    bool found = false;
    LookupResult best;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const CurvePoint& pt = curve.points[i];
        if (!pt.ok) continue;
        const double objective = pt.outcomes.values.front();
        const double compared = pt.outcomes.values.back();
        if (objective > target) continue;
        if (!found || better(compared, pt.theta, best.compared, best.theta)) {
            found = true;
            best.theta = pt.theta;
            best.objective = objective;
            best.compared = compared;
            best_idx = i;
        }
    }
    if (!found) {
        std::ostringstream msg;
        msg << "no threshold on curve '" << curve.indicator_id
            << "' meets the objective bound " << target;
        throw InfeasibleObjective(msg.str());
    }
    if (index_out) *index_out = best_idx;
    return best;
}

}  // namespace

OutcomeVec evaluate_policy(const PolicyRun& run, double theta) {
    TriggerPolicy policy = run.policy;
    policy.theta = theta;
    try {
        const ClosedLoopResult res =
            simulate_closed_loop(run.model, run.x0, policy, run.t0, run.horizon);
        OutcomeVec out;
        out.labels = run.outcome_labels;
        out.values = {outcome_peak(res.traj, run.peak_observation, run.model),
                      outcome_lockdown_pct(res.log, run.t0, run.horizon)};
        return out;
    } catch (const EngineError& e) {
        std::ostringstream msg;
        msg << e.what() << " (theta=" << theta << ")";
        throw EngineError(msg.str());
    }
}

TradeOffCurve sweep(const PolicyRun& run, const ThresholdDomain& domain,
                    int threads, const std::string& scenario_id,
                    const std::string& indicator_id) {
    domain.validate();
    TradeOffCurve curve;
    curve.scenario_id = scenario_id;
    curve.indicator_id = indicator_id;
    curve.tau = run.policy.hist;
    curve.Delta = run.policy.Delta;
    curve.points.resize(domain.values.size());

    auto eval_point = [&](std::size_t i) {
        CurvePoint& pt = curve.points[i];
        pt.theta = domain.values[i];
        try {
            pt.outcomes = evaluate_policy(run, pt.theta);
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.ok = false;
            pt.error = e.what();
        }
    };

    const int n = static_cast<int>(domain.values.size());
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) eval_point(static_cast<std::size_t>(i));
    } else {
        std::atomic<int> cursor{0};
        auto worker = [&] {
            for (int i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1))
                eval_point(static_cast<std::size_t>(i));
        };
        std::vector<std::thread> pool;
        const int k = std::min(threads, n);
        pool.reserve(static_cast<std::size_t>(k));
        for (int w = 0; w < k; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return curve;
}

LookupResult objective_lookup(const TradeOffCurve& curve, double target) {
    return best_grid_point(curve, target, nullptr);
}

LookupResult objective_lookup(const TradeOffCurve& curve, double target,
                              const PolicyEvaluator& evaluate) {
    std::size_t idx = 0;
    LookupResult best = best_grid_point(curve, target, &idx);

    // Refine toward the objective boundary only when the next grid point
    // overshoots it; otherwise the whole bracket is feasible and the grid
    // point already minimizes the compared outcome there.
    if (idx + 1 >= curve.points.size()) return best;
    const CurvePoint& next = curve.points[idx + 1];
    if (!next.ok || next.outcomes.values.front() <= target) return best;

    const double rel_tol = 0.01 * std::abs(target);
    double lo = best.theta;
    double hi = next.theta;
    const double collapse = 1e-12 * std::max({std::abs(lo), std::abs(hi), 1.0});
    for (int iter = 0; iter < 80 && hi - lo > collapse; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const auto [objective, compared] = evaluate(mid);
        if (objective <= target) {
            lo = mid;
            if (std::abs(objective - target) <= rel_tol) {
                best.theta = mid;
                best.objective = objective;
                best.compared = compared;
                best.refined = true;
                return best;
            }
        } else {
            hi = mid;
        }
    }
    // The bracket collapsed (or ran out of iterations) without the objective
    // landing within tolerance: the boundary is not locally monotone at this
    // resolution, so fall back to the grid point and say so.
    best.non_monotone = true;
    return best;
}

ComparisonReport dominance(const TradeOffCurve& a, const TradeOffCurve& b,
                           const std::vector<double>& targets) {
    ComparisonReport rep;
    int a_wins = 0, b_wins = 0, ties = 0, common = 0;
    for (double target : targets) {
        TargetComparison row;
        row.target = target;
        try {
            row.a_compared = objective_lookup(a, target).compared;
        } catch (const InfeasibleObjective&) {
        }
        try {
            row.b_compared = objective_lookup(b, target).compared;
        } catch (const InfeasibleObjective&) {
        }
        if (row.a_compared && row.b_compared) {
            ++common;
            if (*row.a_compared < *row.b_compared) ++a_wins;
            else if (*row.b_compared < *row.a_compared) ++b_wins;
            else ++ties;
        }
        rep.rows.push_back(row);
    }

    if (common == 0) {
        rep.verdict = Dominance::incomparable;
        rep.detail = "no common feasible targets";
    } else if (a_wins > 0 && b_wins > 0) {
        rep.verdict = Dominance::crossing;
        rep.detail = "each curve is strictly better somewhere";
    } else if (ties == common) {
        rep.verdict = Dominance::incomparable;
        rep.detail = "incomparable-by-tie";
    } else if (a_wins > 0 && b_wins == 0 && ties == 0) {
        rep.verdict = Dominance::a_dominates;
        rep.detail = "strictly better at every common target";
    } else if (b_wins > 0 && a_wins == 0 && ties == 0) {
        rep.verdict = Dominance::b_dominates;
        rep.detail = "strictly better at every common target";
    } else {
        rep.verdict = Dominance::incomparable;
        rep.detail = "ties prevent strict dominance";
    }
    return rep;
}

std::vector<double> common_objective_targets(const TradeOffCurve& a,
                                             const TradeOffCurve& b, int n) {
    auto feasible_range = [](const TradeOffCurve& c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& pt : c.points) {
            if (!pt.ok) continue;
            const double obj = pt.outcomes.values.front();
            lo = std::min(lo, obj);
            hi = std::max(hi, obj);
        }
        return std::pair{lo, hi};
    };
    const auto [alo, ahi] = feasible_range(a);
    const auto [blo, bhi] = feasible_range(b);
    const double lo = std::max(alo, blo);
    const double hi = std::min(ahi, bhi);
    std::vector<double> targets;
    if (!(lo <= hi) || n < 1) return targets;
    if (lo == hi || n == 1) {
        targets.push_back(lo);
        return targets;
    }
    const double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) targets.push_back(lo + h * i);
    targets.back() = hi;
    return targets;
}

std::string dominance_tag(Dominance d) {
    switch (d) {
        case Dominance::a_dominates: return "a_dominates";
        case Dominance::b_dominates: return "b_dominates";
        case Dominance::crossing: return "crossing";
        case Dominance::incomparable: return "incomparable";
    }
    return "?";
}

}  // namespace trigsim
