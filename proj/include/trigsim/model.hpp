#pragma once

#include <functional>
#include <string>
#include <vector>

namespace trigsim {

// Compartment values are real-valued person counts.
using State = std::vector<double>;

struct ChileParams {
    double beta_E = 0.0, beta_Im = 0.0, beta_I = 0.0;
    double gamma_E = 0.0, gamma_Im = 0.0, gamma_I = 0.0, gamma_H = 0.0, gamma_Hc = 0.0;
    double phi_EI = 0.0, phi_IR = 0.0, phi_HR = 0.0, phi_HD = 0.0, phi_HcD = 0.0;
    double delta_hat = 0.0;
    double N = 0.0;

    // Throws ConfigError listing every violated invariant.
    void validate() const;
};

struct ChinaParams {
    double beta_E = 0.0, beta_I = 0.0, beta_Iu = 0.0, beta_HR = 0.0, beta_HD = 0.0;
    double gamma_E = 0.0, gamma_I = 0.0, gamma_Iu = 0.0, gamma_HR = 0.0, gamma_HD = 0.0;
    double phi_IHR = 0.0, phi_IHD = 0.0;
    double delta_hat = 0.0;
    double N = 0.0;

    static constexpr double dt = 1.0 / 24.0;
    static constexpr int substeps = 24;

    void validate() const;
};

namespace chile {
enum Comp { S, E, Im, I, R, H, Hc, D, kCompartments };
}
namespace china {
enum Comp { S, E, I, Iu, HR, HD, Rd, Ru, D, kCompartments };
}

double chile_contagion_rate(const State& x, double u, const ChileParams& p);
double china_contagion_rate(const State& x, double u, const ChinaParams& p);

// One calendar day. Chile applies the difference equations once; China runs
// 24 Euler sub-steps with the control held constant within the day.
State chile_step(const State& x, double u, const ChileParams& p);
State china_step_day(const State& x, double u, const ChinaParams& p);

// Runtime model handle: a one-day transition plus the metadata the rest of
// the engine needs (compartment names for I/O, N for tolerances, delta_hat
// for the control bound).
struct ModelSpec {
    std::string id;  // "chile8" | "china9"
    std::vector<std::string> compartments;
    double N = 0.0;
    double delta_hat = 0.0;
    std::function<State(const State&, double)> step;
};

ModelSpec make_chile_model(const ChileParams& p);
ModelSpec make_china_model(const ChinaParams& p);

struct Trajectory {
    int t0 = 0;
    std::vector<State> states;     // indices t0 .. t0 + controls.size()
    std::vector<double> controls;  // indices t0 .. horizon
};

// Nonnegative, right dimension, compartment sum within 1e-9*N of N.
void check_state(const ModelSpec& m, const State& x);

// controls.size() == horizon - t0 + 1; states get one extra entry.
Trajectory simulate_open_loop(const ModelSpec& m, const State& x0, int t0,
                              const std::vector<double>& controls);

}  // namespace trigsim
