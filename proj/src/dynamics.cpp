#include "trigsim/model.hpp"

#include <cmath>
#include <sstream>

#include "trigsim/errors.hpp"

namespace trigsim {

namespace {

void require(std::ostringstream& why, bool ok, const char* what) {
    if (!ok) why << "  - " << what << "\n";
}

void throw_if_any(const std::ostringstream& why, const char* which) {
    const std::string s = why.str();
    if (!s.empty())
        throw ConfigError(std::string(which) + " parameters invalid:\n" + s);
}

// Clamp tiny float-noise negatives to zero; anything beyond the tolerance
// means the parameter regime left the model's validity and must not be
// papered over.
void settle_negatives(State& x, double N, const std::vector<std::string>& names) {
    const double tol = 1e-9 * N;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 0.0) {
            if (x[i] < -tol) {
                std::ostringstream msg;
                msg << "compartment " << names[i] << " went negative (" << x[i]
                    << ", tolerance " << -tol << ")";
                throw EngineError(msg.str());
            }
            x[i] = 0.0;
        }
    }
}

const std::vector<std::string> kChileNames = {"S", "E", "Im", "I", "R", "H", "Hc", "D"};
const std::vector<std::string> kChinaNames = {"S", "E", "I", "Iu", "HR", "HD", "Rd", "Ru", "D"};

}  // namespace

void ChileParams::validate() const {
    std::ostringstream why;
    require(why, beta_E > 0 && beta_Im > 0 && beta_I > 0, "all beta rates must be > 0");
    require(why, gamma_E > 0 && gamma_Im > 0 && gamma_I > 0 && gamma_H > 0 && gamma_Hc > 0,
            "all gamma rates must be > 0");
    require(why, gamma_E <= 1 && gamma_Im <= 1 && gamma_I <= 1 && gamma_H <= 1 && gamma_Hc <= 1,
            "each gamma must be <= 1 (one-day step stability)");
    auto frac = [](double v) { return v >= 0.0 && v <= 1.0; };
    require(why, frac(phi_EI) && frac(phi_IR) && frac(phi_HR) && frac(phi_HD) && frac(phi_HcD),
            "all phi fractions must lie in [0,1]");
    require(why, phi_HR + phi_HD <= 1.0, "phi_HR + phi_HD must be <= 1");
    require(why, delta_hat > 0.0 && delta_hat < 1.0, "delta_hat must lie in (0,1)");
    require(why, N > 0.0, "population N must be > 0");
    throw_if_any(why, "chile8");
}

void ChinaParams::validate() const {
    std::ostringstream why;
    require(why, beta_E > 0 && beta_I > 0 && beta_Iu > 0 && beta_HR > 0 && beta_HD > 0,
            "all beta rates must be > 0");
    require(why, gamma_E > 0 && gamma_I > 0 && gamma_Iu > 0 && gamma_HR > 0 && gamma_HD > 0,
            "all gamma rates must be > 0");
    require(why, dt * gamma_E <= 1 && dt * gamma_I <= 1 && dt * gamma_Iu <= 1 &&
                     dt * gamma_HR <= 1 && dt * gamma_HD <= 1,
            "dt*gamma must be <= 1 for every gamma");
    require(why, phi_IHR >= 0 && phi_IHD >= 0 && phi_IHR + phi_IHD <= 1.0,
            "phi_IHR, phi_IHD must be nonnegative with phi_IHR + phi_IHD <= 1");
    require(why, delta_hat > 0.0 && delta_hat < 1.0, "delta_hat must lie in (0,1)");
    require(why, N > 0.0, "population N must be > 0");
    throw_if_any(why, "china9");
}

double chile_contagion_rate(const State& x, double u, const ChileParams& p) {
    using namespace chile;
    const double alive = p.N - x[D];
    if (alive <= 0.0) throw EngineError("degenerate population: N - D <= 0");
    return ((1.0 - u) * (p.beta_E * x[E] + p.beta_Im * x[Im]) +
            p.delta_hat * p.beta_I * x[I]) /
           alive;
}

State chile_step(const State& x, double u, const ChileParams& p) {
    using namespace chile;
    const double lam = chile_contagion_rate(x, u, p);
    State y(kCompartments);
    y[S] = x[S] - lam * x[S];
    y[E] = x[E] + lam * x[S] - p.gamma_E * x[E];
    y[Im] = x[Im] + (1.0 - p.phi_EI) * p.gamma_E * x[E] - p.gamma_Im * x[Im];
    y[I] = x[I] + p.phi_EI * p.gamma_E * x[E] - p.gamma_I * x[I];
    y[R] = x[R] + p.gamma_Im * x[Im] + p.phi_IR * p.gamma_I * x[I] +
           p.phi_HR * p.gamma_H * x[H];
    y[H] = x[H] + (1.0 - p.phi_IR) * p.gamma_I * x[I] +
           (1.0 - p.phi_HcD) * p.gamma_Hc * x[Hc] - p.gamma_H * x[H];
    y[Hc] = x[Hc] + (1.0 - p.phi_HR - p.phi_HD) * p.gamma_H * x[H] - p.gamma_Hc * x[Hc];
    y[D] = x[D] + p.phi_HD * p.gamma_H * x[H] + p.phi_HcD * p.gamma_Hc * x[Hc];
    settle_negatives(y, p.N, kChileNames);
    return y;
}

double china_contagion_rate(const State& x, double u, const ChinaParams& p) {
    using namespace china;
    return (1.0 - u) *
           (p.beta_E * x[E] + p.beta_I * x[I] + p.beta_Iu * x[Iu] +
            p.beta_HR * x[HR] + p.beta_HD * x[HD]) /
           p.N;
}

State china_step_day(const State& x, double u, const ChinaParams& p) {
    using namespace china;
    State cur = x;
    State y(kCompartments);
    for (int s = 0; s < ChinaParams::substeps; ++s) {
        const double lam = china_contagion_rate(cur, u, p);
        const double dt = ChinaParams::dt;
        y[S] = cur[S] - dt * lam * cur[S];
        y[E] = cur[E] + dt * (lam * cur[S] - p.gamma_E * cur[E]);
        y[I] = cur[I] + dt * (p.gamma_E * cur[E] - p.gamma_I * cur[I]);
        y[Iu] = cur[Iu] + dt * ((1.0 - p.phi_IHR - p.phi_IHD) * p.gamma_I * cur[I] -
                                p.gamma_Iu * cur[Iu]);
        y[HR] = cur[HR] + dt * (p.phi_IHR * p.gamma_I * cur[I] - p.gamma_HR * cur[HR]);
        y[HD] = cur[HD] + dt * (p.phi_IHD * p.gamma_I * cur[I] - p.gamma_HD * cur[HD]);
        y[Rd] = cur[Rd] + dt * p.gamma_HR * cur[HR];
        y[Ru] = cur[Ru] + dt * p.gamma_Iu * cur[Iu];
        y[D] = cur[D] + dt * p.gamma_HD * cur[HD];
        settle_negatives(y, p.N, kChinaNames);
        cur = y;
    }
    return cur;
}

ModelSpec make_chile_model(const ChileParams& p) {
    ModelSpec m;
    m.id = "chile8";
    m.compartments = kChileNames;
    m.N = p.N;
    m.delta_hat = p.delta_hat;
    m.step = [p](const State& x, double u) { return chile_step(x, u, p); };
    return m;
}

ModelSpec make_china_model(const ChinaParams& p) {
    ModelSpec m;
    m.id = "china9";
    m.compartments = kChinaNames;
    m.N = p.N;
    m.delta_hat = p.delta_hat;
    m.step = [p](const State& x, double u) { return china_step_day(x, u, p); };
    return m;
}

void check_state(const ModelSpec& m, const State& x) {
    if (x.size() != m.compartments.size()) {
        std::ostringstream msg;
        msg << "state has " << x.size() << " compartments, model " << m.id
            << " expects " << m.compartments.size();
        throw ConfigError(msg.str());
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= 0.0)) {
            std::ostringstream msg;
            msg << "compartment " << m.compartments[i] << " = " << x[i]
                << " must be >= 0";
            throw ConfigError(msg.str());
        }
        sum += x[i];
    }
    if (std::abs(sum - m.N) > 1e-9 * m.N) {
        std::ostringstream msg;
        msg << "compartments sum to " << sum << ", expected N = " << m.N;
        throw ConfigError(msg.str());
    }
}

Trajectory simulate_open_loop(const ModelSpec& m, const State& x0, int t0,
                              const std::vector<double>& controls) {
    Trajectory traj;
    traj.t0 = t0;
    traj.states.reserve(controls.size() + 1);
    traj.controls = controls;
    traj.states.push_back(x0);
    for (std::size_t i = 0; i < controls.size(); ++i) {
        const double u = controls[i];
        if (u < 0.0 || u > 1.0 - m.delta_hat + 1e-12) {
            std::ostringstream msg;
            msg << "control " << u << " at day " << (t0 + static_cast<int>(i))
                << " outside [0, 1 - delta_hat]";
            throw EngineError(msg.str());
        }
        try {
            traj.states.push_back(m.step(traj.states.back(), u));
        } catch (const EngineError& e) {
            std::ostringstream msg;
            msg << e.what() << " (day " << (t0 + static_cast<int>(i)) << ")";
            throw EngineError(msg.str());
        }
    }
    return traj;
}

}  // namespace trigsim
