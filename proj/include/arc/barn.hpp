#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "selector.hpp"

namespace arc {

/// Well-mixed single-zone barn: CO2 fraction and air temperature, with a
/// fan (affine flow map) and an electric heater as inputs.
struct BarnParams {
    double volume = 3000.0;        // m^3
    double n_cows = 80.0;
    double g_co2 = 5e-5;           // m^3/s CO2 per cow
    double q_cow = 1000.0;         // W per cow
    double q_max = 15.0;           // m^3/s fan airflow at 100%
    double q_min = 0.1;            // m^3/s fan airflow at 0%
    double q_heat_max = 50000.0;   // W heater rating
    double ua = 2000.0;            // W/K heat-loss coefficient
    double c_out_ppm = 420.0;      // outdoor CO2
    double rho = 1.2;              // kg/m^3
    double cp = 1005.0;            // J/(kg K)

    void validate() const {
        const double vals[] = {volume, n_cows, g_co2,     q_cow, q_max,
                               q_min,  ua,     c_out_ppm, rho,   cp};
        for (double v : vals)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("barn parameter out of range");
        if (!(q_min < q_max))
            throw std::invalid_argument("q_min must be < q_max");
    }
};

/// CO2 is held internally as a volumetric fraction; ppm = fraction * 1e6.
struct BarnState {
    double c = 420e-6; // CO2 fraction
    double t = 0.0;    // degC

    double c_ppm() const { return c * 1e6; }
    static BarnState from_ppm(double ppm, double t) { return {ppm * 1e-6, t}; }
};

struct BarnInputs {
    double u1 = 50.0;    // fan speed %
    double u2 = 0.0;     // heater %
    double t_out = 0.0;  // outdoor degC
    std::optional<double> n_cows_override;
};

struct BarnDerivatives {
    double dc_dt; // fraction/s
    double dt_dt; // K/s
};

/// Fan airflow, affine in the speed command.
inline double fan_flow(double u1, const BarnParams& p) {
    if (!(u1 >= 0.0 && u1 <= 100.0))
        throw std::invalid_argument("fan speed outside [0,100]%");
    return p.q_min + (p.q_max - p.q_min) * u1 / 100.0;
}

/// CO2 mass balance and energy balance. The two are decoupled: dc/dt does
/// not depend on t and dt/dt does not depend on c.
inline BarnDerivatives barn_derivatives(const BarnState& s, const BarnInputs& in,
                                        const BarnParams& p) {
    if (!(in.u2 >= 0.0 && in.u2 <= 100.0))
        throw std::invalid_argument("heater command outside [0,100]%");
    const double n = in.n_cows_override.value_or(p.n_cows);
    const double q = fan_flow(in.u1, p);
    const double c_out = p.c_out_ppm * 1e-6;
    const double dc = (n * p.g_co2 + q * (c_out - s.c)) / p.volume;
    const double rcq = p.rho * p.cp * q;
    const double dt = (n * p.q_cow + p.q_heat_max * in.u2 / 100.0 -
                       (rcq + p.ua) * (s.t - in.t_out)) /
                      (p.rho * p.cp * p.volume);
    return {dc, dt};
}

struct BarnSteadyState {
    double c_ppm;
    double t;
};

/// Closed-form steady state for fixed inputs.
inline BarnSteadyState barn_steady_state(double u1, double u2, double t_out,
                                         const BarnParams& p,
                                         std::optional<double> n_cows = {}) {
    const double n = n_cows.value_or(p.n_cows);
    const double q = fan_flow(u1, p);
    const double c = p.c_out_ppm + 1e6 * n * p.g_co2 / q;
    const double t =
        t_out + (n * p.q_cow + p.q_heat_max * u2 / 100.0) / (p.rho * p.cp * q + p.ua);
    return {c, t};
}

// ---------------------------------------------------------------------------
// Analytic active-set solver for the barn's selector hierarchy.
// ---------------------------------------------------------------------------

/// What a fan-side controller in the selector chain holds, in chain order.
struct FanChainEntry {
    std::string label;        // controller name for reports
    SelectorKind selector;    // selector this controller enters
    enum class Target { Temp, Co2 } target;
    double value;             // setpoint / bound in CV units
    double kc;                // controller gain, % per CV unit
    double taut_over_taui = 1.0;
};

/// Priority structure of the full barn scheme: ordered fan chain (first
/// selector takes the desired input u0) plus the heater controller of the
/// split-parallel pair.
struct BarnStructure {
    double u0 = 50.0;                 // desired fan speed into the first selector
    std::vector<FanChainEntry> fan_chain;
    std::string heater_label = "TC";
    double heater_sp = 4.0;
    double heater_kc = 22.0;
    double heater_taut_over_taui = 1.0;
};

struct ActiveSetSolution {
    double c_ppm;
    double t;
    double u1;
    double u2;
    std::string active_u1;            // e.g. "c=1000", "u1=50"
    std::string active_u2;            // e.g. "u2=100", "T=4"
    std::vector<std::string> relaxed; // comfort bounds not met at this point
};

namespace detail {

struct Candidate {
    enum class Kind { FixU1, FixU2, FixT, FixC } kind;
    double value;
};

inline std::string candidate_label(const Candidate& cd) {
    auto fmt = [](double v) {
        // trim trailing zeros for readable labels
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    };
    switch (cd.kind) {
    case Candidate::Kind::FixU1: return "u1=" + fmt(cd.value);
    case Candidate::Kind::FixU2: return "u2=" + fmt(cd.value);
    case Candidate::Kind::FixT: return "T=" + fmt(cd.value);
    case Candidate::Kind::FixC: return "c=" + fmt(cd.value);
    }
    return "?";
}

struct PairSolution {
    double q, c, t, u1, u2;
};

/// Solve the two steady-state balances with two quantities pinned.
/// Returns nothing when the combination is degenerate or out of range.
inline std::optional<PairSolution> solve_pair(const Candidate& a, const Candidate& b,
                                              double t_out, const BarnParams& p,
                                              double n) {
    using K = Candidate::Kind;
    if (a.kind == b.kind)
        return {};
    // c is a function of q alone, so pinning both u1 and c overdetermines q.
    if ((a.kind == K::FixU1 && b.kind == K::FixC) ||
        (a.kind == K::FixC && b.kind == K::FixU1))
        return {};

    const double rc = p.rho * p.cp;
    const double heat_cows = n * p.q_cow;
    auto u1_from_q = [&](double q) {
        return (q - p.q_min) / (p.q_max - p.q_min) * 100.0;
    };
    auto q_from_c = [&](double c_ppm) -> std::optional<double> {
        if (c_ppm <= p.c_out_ppm) return {};
        return 1e6 * n * p.g_co2 / (c_ppm - p.c_out_ppm);
    };

    double u1 = NAN, u2 = NAN, t = NAN, c = NAN, q = NAN;
    auto get = [&](K k) -> const Candidate* {
        if (a.kind == k) return &a;
        if (b.kind == k) return &b;
        return nullptr;
    };
    const Candidate* fu1 = get(K::FixU1);
    const Candidate* fu2 = get(K::FixU2);
    const Candidate* ft = get(K::FixT);
    const Candidate* fc = get(K::FixC);

    if (fu1) {
        u1 = fu1->value;
        if (!(u1 >= 0.0 && u1 <= 100.0)) return {};
        q = fan_flow(u1, p);
        c = p.c_out_ppm + 1e6 * n * p.g_co2 / q;
        if (fu2) {
            u2 = fu2->value;
            t = t_out + (heat_cows + p.q_heat_max * u2 / 100.0) / (rc * q + p.ua);
        } else { // fixed T: solve the heater duty
            t = ft->value;
            u2 = ((rc * q + p.ua) * (t - t_out) - heat_cows) * 100.0 / p.q_heat_max;
        }
    } else if (fc) {
        auto qq = q_from_c(fc->value);
        if (!qq) return {};
        q = *qq;
        c = fc->value;
        u1 = u1_from_q(q);
        if (fu2) {
            u2 = fu2->value;
            t = t_out + (heat_cows + p.q_heat_max * u2 / 100.0) / (rc * q + p.ua);
        } else {
            t = ft->value;
            u2 = ((rc * q + p.ua) * (t - t_out) - heat_cows) * 100.0 / p.q_heat_max;
        }
    } else {
        // fixed u2 and fixed T: solve the airflow from the energy balance
        u2 = fu2->value;
        t = ft->value;
        if (!(t - t_out > 1e-12)) return {};
        const double denom = (heat_cows + p.q_heat_max * u2 / 100.0) / (t - t_out);
        q = (denom - p.ua) / rc;
        if (!(q > 0.0)) return {};
        u1 = u1_from_q(q);
        c = p.c_out_ppm + 1e6 * n * p.g_co2 / q;
    }
    if (!std::isfinite(u1) || !std::isfinite(u2) || !std::isfinite(t) ||
        !std::isfinite(c))
        return {};
    return PairSolution{q, c, t, u1, u2};
}

} // namespace detail

/// True when the selector hierarchy, at tracking equilibrium, would hold
/// exactly this operating point. Each deselected controller's steady
/// candidate is u_sel + (tau_t/tau_i)*kc*e; the chain must reproduce u1 and
/// the heater saturation state must be self-consistent.
inline bool barn_point_consistent(const detail::PairSolution& s, double /*t_out*/,
                                  const BarnStructure& st,
                                  std::string* fan_winner = nullptr) {
    const double tol = 1e-6;
    if (s.u1 < -tol || s.u1 > 100.0 + tol) return false;
    if (s.u2 < -tol || s.u2 > 100.0 + tol) return false;

    double chain = st.u0;
    std::string winner = "u0";
    for (const auto& e : st.fan_chain) {
        const double y = e.target == FanChainEntry::Target::Temp ? s.t : s.c;
        const double err = e.value - y;
        const double cand_unclamped = s.u1 + e.taut_over_taui * e.kc * err;
        const double cand = std::min(100.0, std::max(0.0, cand_unclamped));
        const bool cand_wins = e.selector == SelectorKind::Min ? cand < chain
                                                               : cand > chain;
        if (cand_wins) {
            chain = cand;
            winner = cand_unclamped > 100.0   ? "u1=100"
                     : cand_unclamped < 0.0   ? "u1=0"
                                              : e.label;
        }
    }
    if (std::fabs(chain - s.u1) > 1e-6 * std::max(1.0, std::fabs(s.u1)))
        return false;

    const double cand_h = s.u2 + st.heater_taut_over_taui * st.heater_kc *
                                     (st.heater_sp - s.t);
    if (s.u2 <= tol) {
        if (cand_h > tol) return false;
    } else if (s.u2 >= 100.0 - tol) {
        if (cand_h < 100.0 - tol) return false;
    } else {
        if (std::fabs(cand_h - s.u2) > 1e-6 * std::max(1.0, s.u2)) return false;
    }
    if (fan_winner) *fan_winner = winner;
    return true;
}

/// Enumerate candidate active pairs, solve each two-constraint steady
/// state, and keep the one the selector hierarchy would actually settle at.
inline std::optional<ActiveSetSolution>
solve_active_set(double t_out, const BarnParams& p, const BarnStructure& st,
                 std::optional<double> n_cows = {}) {
    using detail::Candidate;
    using K = detail::Candidate::Kind;
    const double n = n_cows.value_or(p.n_cows);

    // the desired input, the heater range, and the fan's built-in bounds
    std::vector<Candidate> candidates = {
        {K::FixU1, st.u0},  {K::FixU2, 0.0}, {K::FixU2, 100.0},
        {K::FixU1, 100.0},  {K::FixU1, 0.0},
    };
    for (const auto& e : st.fan_chain)
        candidates.push_back({e.target == FanChainEntry::Target::Temp ? K::FixT
                                                                      : K::FixC,
                              e.value});
    candidates.push_back({K::FixT, st.heater_sp});

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            auto sol = detail::solve_pair(candidates[i], candidates[j], t_out, p, n);
            if (!sol)
                continue;
            std::string winner;
            if (!barn_point_consistent(*sol, t_out, st, &winner))
                continue;

            // Attribute the pair: fan side first, heater side second.
            const Candidate* fan_side = &candidates[i];
            const Candidate* heat_side = &candidates[j];
            if (fan_side->kind == K::FixU2 ||
                (fan_side->kind == K::FixT && fan_side->value == st.heater_sp &&
                 heat_side->kind != K::FixU2))
                std::swap(fan_side, heat_side);

            ActiveSetSolution out;
            out.c_ppm = sol->c;
            out.t = sol->t;
            out.u1 = sol->u1;
            out.u2 = sol->u2;
            out.active_u1 = detail::candidate_label(*fan_side);
            out.active_u2 = detail::candidate_label(*heat_side);
            auto note = [&](bool bad, const std::string& msg) {
                if (bad) out.relaxed.push_back(msg);
            };
            note(sol->c > 1000.0 + 0.5, "c above 1000 ppm");
            note(sol->c > 3000.0 + 0.5, "c above 3000 ppm");
            note(sol->t > 20.0 + 0.05, "T above 20 C");
            note(sol->t < 5.0 - 0.05, "T below 5 C");
            note(sol->t < 0.0 - 0.05, "T below 0 C");
            return out;
        }
    }
    return {};
}

} // namespace arc
