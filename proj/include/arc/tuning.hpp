#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "barn.hpp"

namespace arc {

/// Steady-state linearization of the barn at one operating point: gains
/// from the two inputs to the two outputs plus the open-loop time
/// constants, all in closed form.
struct LinearizedPoint {
    double q;           // airflow at the point, m^3/s
    double tau_c_co2;   // s
    double tau_t_temp;  // s
    double k_c_u1;      // ppm/%
    double k_t_u1;      // degC/%
    double k_t_u2;      // degC/%

    double kprime_c_u1() const { return k_c_u1 / tau_c_co2; }
    double kprime_t_u1() const { return k_t_u1 / tau_t_temp; }
    double kprime_t_u2() const { return k_t_u2 / tau_t_temp; }
};

inline LinearizedPoint linearize_barn(double u1, double u2, double t_out,
                                      const BarnParams& p) {
    const double q = fan_flow(u1, p);
    const auto ss = barn_steady_state(u1, u2, t_out, p);
    const double rc = p.rho * p.cp;
    const double span = (p.q_max - p.q_min) / 100.0;

    LinearizedPoint lp;
    lp.q = q;
    lp.tau_c_co2 = p.volume / q;
    lp.tau_t_temp = rc * p.volume / (rc * q + p.ua);
    lp.k_c_u1 = -p.n_cows * p.g_co2 * span / (q * q) * 1e6;
    lp.k_t_u1 = -(ss.t - t_out) * rc / (rc * q + p.ua) * span;
    lp.k_t_u2 = (p.q_heat_max / 100.0) / (rc * q + p.ua);
    return lp;
}

struct SimcTuning {
    double kc;
    double tau_i_s;
    double tau_c_choice;
};

/// SIMC PI rule for a first-order process with no delay, expressed through
/// the initial slope k' = k/tau.
inline SimcTuning simc_pi(double kprime, double tau, double tau_c_choice) {
    if (kprime == 0.0 || !std::isfinite(kprime))
        throw std::invalid_argument("simc_pi: zero or non-finite initial slope");
    if (!(tau > 0.0) || !(tau_c_choice > 0.0))
        throw std::invalid_argument("simc_pi: time constants must be > 0");
    return {1.0 / (kprime * tau_c_choice), std::min(tau, 4.0 * tau_c_choice),
            tau_c_choice};
}

struct TuningRow {
    std::string name;
    std::string mv;       // "u1" (fan) or "u2" (heater)
    double kc;
    double tau_i_s;
    double setpoint;
    std::string cv;       // "T" or "c"
};

/// The six PI loops of the full barn scheme. The nominal rows carry the
/// rounded gains used in simulation (-10 rather than the raw -8.3); the
/// off-nominal rows are scaled by the given factors, defaulting to the
/// simulated choices (factor 3 for TC2, factor 5 for CC1).
inline std::vector<TuningRow> tuning_table(const BarnParams& /*params*/,
                                           double tc2_factor = 3.0,
                                           double cc1_factor = 5.0) {
    auto scale2 = [](double v) { return std::round(v * 100.0) / 100.0; };
    std::vector<TuningRow> rows;
    rows.push_back({"TC1", "u1", -10.0, 350.0, 20.0, "T"});
    rows.push_back({"TC3", "u1", -10.0, 350.0, 5.0, "T"});
    rows.push_back({"TC2", "u1", scale2(-10.0 / tc2_factor), 350.0 * tc2_factor,
                    0.0, "T"});
    rows.push_back({"CC2", "u1", -0.1, 350.0, 1000.0, "c"});
    rows.push_back({"CC1", "u1", scale2(-0.1 / cc1_factor), 350.0 * cc1_factor,
                    3000.0, "c"});
    rows.push_back({"TC", "u2", 22.0, 350.0, 4.0, "T"});
    return rows;
}

} // namespace arc
