#pragma once

#include <cmath>
#include <stdexcept>

#include "graph.hpp"

namespace arc {

/// Surrogate two-phase separator train: well with quasi-static drawdown,
/// choke valve, flash into a vessel (gas to a compressor, liquid through a
/// valve). Sized so the nominal point sits at 70% compressor speed, 60%
/// choke and 180 bar well pressure, leaving headroom to saturate in either
/// direction.
struct SeparatorParams {
    double p_res = 200.0;       // bar, static reservoir pressure
    double r_well = 10.0;       // bar per unit feed flow
    // feed = 2.0 at choke 60%, p_well 180, p_sep 70
    double cv_choke = 2.0 / (0.6 * std::sqrt(110.0));
    double gas_fraction = 0.5;  // mass fraction flashing to gas
    double v_gas = 0.1;         // bar per unit gas imbalance per s
    double area = 0.2;          // level-% per unit liquid imbalance per s
    double k_comp = 1.0 / 0.7;  // compressor flow at 100% speed, p_sep = p_sp
    // liquid out = 1.0 at valve 50%, p_sep 70, downstream 20
    double cv_liq = 1.0 / (0.5 * std::sqrt(50.0));
    double p_downstream = 20.0; // bar at the liquid valve outlet
    double p_min_well = 170.0;  // bar, reservoir protection limit
    double p_sp = 70.0;         // bar, nominal separator pressure setpoint
    double delta = 1.0;         // bar, split-parallel setpoint separation

    void validate() const {
        if (!(p_res > p_min_well && p_min_well > p_sp))
            throw std::invalid_argument("need p_res > p_min_well > p_sp");
        const double vals[] = {r_well, cv_choke, gas_fraction, v_gas,
                               area,   k_comp,   cv_liq,       delta};
        for (double v : vals)
            if (!(v > 0.0))
                throw std::invalid_argument("separator parameter must be > 0");
    }
};

struct SeparatorState {
    double p_sep = 70.0; // bar
    double level = 50.0; // %
};

struct SeparatorInputs {
    double z_choke = 60.0;   // %
    double comp_speed = 70.0; // %
    double z_liq = 50.0;     // %
};

/// Quasi-static well: drawdown proportional to feed flow.
inline double well_pressure(double feed_flow, const SeparatorParams& p) {
    if (!(feed_flow >= 0.0))
        throw std::invalid_argument("feed flow must be >= 0");
    return p.p_res - p.r_well * feed_flow;
}

/// Feed through the choke with the well pressure solved self-consistently:
/// F = cv*z*sqrt(p_well(F) - p_sep). Zero when the vessel pressure exceeds
/// the available well pressure (check-valve behaviour).
inline double choke_flow(double z_choke, double p_sep, const SeparatorParams& p) {
    const double k = p.cv_choke * z_choke / 100.0;
    if (k <= 0.0)
        return 0.0;
    const double head = p.p_res - p_sep;
    if (head <= 0.0)
        return 0.0;
    // F^2 + k^2 r F - k^2 head = 0, positive root
    const double k2 = k * k;
    return (-k2 * p.r_well + std::sqrt(k2 * k2 * p.r_well * p.r_well +
                                       4.0 * k2 * head)) /
           2.0;
}

inline double comp_flow(double speed, double p_sep, const SeparatorParams& p) {
    if (p_sep <= 0.0)
        return 0.0;
    return p.k_comp * speed / 100.0 * std::sqrt(p_sep / p.p_sp);
}

inline double liquid_flow(double z_liq, double p_sep, const SeparatorParams& p) {
    const double head = p_sep - p.p_downstream;
    if (head <= 0.0)
        return 0.0;
    return p.cv_liq * z_liq / 100.0 * std::sqrt(head);
}

struct SeparatorDerivatives {
    double dp_sep_dt;
    double dlevel_dt;
    double feed;
    double p_well;
};

inline SeparatorDerivatives separator_derivatives(const SeparatorState& s,
                                                  const SeparatorInputs& in,
                                                  const SeparatorParams& p) {
    for (double u : {in.z_choke, in.comp_speed, in.z_liq})
        if (!(u >= 0.0 && u <= 100.0))
            throw std::invalid_argument("separator actuator outside [0,100]%");
    const double feed = choke_flow(in.z_choke, s.p_sep, p);
    const double pw = well_pressure(feed, p);
    const double dp = p.v_gas * (p.gas_fraction * feed -
                                 comp_flow(in.comp_speed, s.p_sep, p));
    const double dl = p.area * ((1.0 - p.gas_fraction) * feed -
                                liquid_flow(in.z_liq, s.p_sep, p));
    return {dp, dl, feed, pw};
}

/// Commissioned nominal balance point for the default parameters.
inline SeparatorState nominal_separator_state() { return {70.0, 50.0}; }
inline SeparatorInputs nominal_separator_inputs() { return {60.0, 70.0, 50.0}; }

// ---------------------------------------------------------------------------
// Control schemes
// ---------------------------------------------------------------------------

struct SeparatorTunings {
    double pc_kc = -12.0, pc_taui = 233.0;   // separator pressure -> compressor
    double pcb_kc = 7.0, pcb_taui = 233.0;   // separator pressure -> choke
    double pc1_kc = -1.0, pc1_taui = 50.0;   // well pressure -> choke
    double lc_kc = -5.0, lc_taui = 200.0;    // level -> liquid valve
};

/// Nominal scheme: operator sets the choke (TPM at feed), pressure to the
/// compressor, level to the liquid valve.
inline ControlGraph build_fig1(const SeparatorParams& p,
                               const SeparatorTunings& t = {}) {
    ControlGraph g;
    g.add_external("z_s");
    g.add_controller(PiController("PC", t.pc_kc, t.pc_taui, p.p_sp));
    g.add_controller(PiController("LC", t.lc_kc, t.lc_taui, 50.0));
    g.bind_measurement("PC", "p_sep");
    g.bind_measurement("LC", "level");
    g.bind_mv("choke", "z_s");
    g.bind_mv("comp", "PC");
    g.bind_mv("lv", "LC");
    g.finalize();
    return g;
}

/// Adds the minimum-well-pressure override: the choke follows the smaller
/// of the operator value and the well pressure controller.
inline ControlGraph build_fig2(const SeparatorParams& p,
                               const SeparatorTunings& t = {}) {
    ControlGraph g;
    g.add_external("z_s");
    g.add_controller(PiController("PC", t.pc_kc, t.pc_taui, p.p_sp));
    g.add_controller(PiController("PC1", t.pc1_kc, t.pc1_taui, p.p_min_well));
    g.add_controller(PiController("LC", t.lc_kc, t.lc_taui, 50.0));
    g.bind_measurement("PC", "p_sep");
    g.bind_measurement("PC1", "p_well");
    g.bind_measurement("LC", "level");
    g.add_selector("choke_sel", SelectorKind::Min, {"z_s", "PC1"});
    g.bind_mv("choke", "choke_sel");
    g.bind_mv("comp", "PC");
    g.bind_mv("lv", "LC");
    g.finalize();
    return g;
}

/// Bidirectional scheme: split-parallel pressure pair PC_A (SPL, to the
/// compressor) and PC_B (SPH = SPL + delta, into the choke MIN-selector),
/// so the TPM migrates to whichever of feed valve or compressor is the
/// bottleneck.
inline ControlGraph build_fig3(const SeparatorParams& p,
                               const SeparatorTunings& t = {}) {
    ControlGraph g;
    g.add_external("z_s");
    g.add_constant("u0_comp", 100.0);
    g.add_controller(PiController("PC_A", t.pc_kc, t.pc_taui, p.p_sp));
    g.add_controller(
        PiController("PC_B", t.pcb_kc, t.pcb_taui, p.p_sp + p.delta));
    g.add_controller(PiController("PC1", t.pc1_kc, t.pc1_taui, p.p_min_well));
    g.add_controller(PiController("LC", t.lc_kc, t.lc_taui, 50.0));
    g.bind_measurement("PC_A", "p_sep");
    g.bind_measurement("PC_B", "p_sep");
    g.bind_measurement("PC1", "p_well");
    g.bind_measurement("LC", "level");
    g.add_selector("choke_sel", SelectorKind::Min, {"z_s", "PC1", "PC_B"});
    g.add_selector("comp_sel", SelectorKind::Min, {"u0_comp", "PC_A"});
    g.bind_mv("choke", "choke_sel");
    g.bind_mv("comp", "comp_sel");
    g.bind_mv("lv", "LC");
    g.finalize();
    SplitParallelPair{"PC_A", "PC_B", p.delta}.validate(g);
    return g;
}

/// Warm-start a separator graph at an operating point.
inline void warm_start_separator(ControlGraph& g, const SeparatorState& s,
                                 const SeparatorInputs& in,
                                 const SeparatorParams& p) {
    const double feed = choke_flow(in.z_choke, s.p_sep, p);
    const double pw = well_pressure(feed, p);
    std::map<std::string, double> y = {
        {"p_sep", s.p_sep}, {"level", s.level}, {"p_well", pw}};
    std::map<std::string, double> mv = {
        {"choke", in.z_choke}, {"comp", in.comp_speed}, {"lv", in.z_liq}};
    for (const auto& [name, ctrl] : g.controllers())
        g.controller(name).warm_start(y.at(g.measurement_bindings().at(name)),
                                      mv.at(g.mv_of(name)));
}

} // namespace arc
