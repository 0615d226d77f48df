#pragma once

#include <map>
#include <string>
#include <vector>

#include "barn.hpp"
#include "graph.hpp"
#include "tuning.hpp"

namespace arc {

namespace detail {

inline TuningRow find_row(const std::vector<TuningRow>& rows, const std::string& n) {
    for (const auto& r : rows)
        if (r.name == n)
            return r;
    throw std::invalid_argument("no tuning row named " + n);
}

inline PiController make_pi(const TuningRow& r) {
    return PiController(r.name, r.kc, r.tau_i_s, r.setpoint);
}

} // namespace detail

/// Priority structure of the full barn scheme, matching build_cow3().
inline BarnStructure cow3_structure(const std::vector<TuningRow>& rows) {
    using T = FanChainEntry::Target;
    BarnStructure st;
    st.u0 = 50.0;
    auto entry = [&](const std::string& n, SelectorKind k, T tgt) {
        auto r = detail::find_row(rows, n);
        st.fan_chain.push_back({n, k, tgt, r.setpoint, r.kc, 1.0});
    };
    entry("TC1", SelectorKind::Max, T::Temp);
    entry("TC3", SelectorKind::Min, T::Temp);
    entry("CC2", SelectorKind::Max, T::Co2);
    entry("TC2", SelectorKind::Min, T::Temp);
    entry("CC1", SelectorKind::Max, T::Co2);
    auto h = detail::find_row(rows, "TC");
    st.heater_label = h.name;
    st.heater_sp = h.setpoint;
    st.heater_kc = h.kc;
    return st;
}

inline BarnStructure cow3_structure(const BarnParams& p) {
    return cow3_structure(tuning_table(p));
}

namespace detail {

/// Shared construction for the barn fan chains: listed controllers enter
/// the chain in order, the first selector also takes the desired input.
inline ControlGraph build_cow_chain(
    const std::vector<TuningRow>& rows,
    const std::vector<std::pair<std::string, SelectorKind>>& chain,
    bool with_heater) {
    ControlGraph g;
    g.add_constant("u0", 50.0);
    for (const auto& [name, kind] : chain) {
        auto r = find_row(rows, name);
        g.add_controller(make_pi(r));
        g.bind_measurement(name, r.cv);
    }
    std::string prev = "u0";
    int i = 0;
    for (const auto& [name, kind] : chain) {
        std::string label = "sel" + std::to_string(++i);
        g.add_selector(label, kind, {prev, name});
        prev = label;
    }
    g.bind_mv("u1", prev);
    if (with_heater) {
        auto r = find_row(rows, "TC");
        g.add_controller(make_pi(r));
        g.bind_measurement("TC", r.cv);
        g.bind_mv("u2", "TC");
    }
    g.finalize();
    return g;
}

} // namespace detail

/// Band temperature control with the fan only (MAX for T<=20 first, MIN
/// for T>=5 last; the order is interchangeable for this pair).
inline ControlGraph build_cow2a(const std::vector<TuningRow>& rows) {
    return detail::build_cow_chain(
        rows, {{"TC1", SelectorKind::Max}, {"TC3", SelectorKind::Min}}, false);
}

/// Adds the CO2 ceiling; its MAX-selector sits at the end of the chain
/// because the 1000 ppm bound outranks the 5 C floor.
inline ControlGraph build_cow2(const std::vector<TuningRow>& rows) {
    return detail::build_cow_chain(rows,
                                   {{"TC1", SelectorKind::Max},
                                    {"TC3", SelectorKind::Min},
                                    {"CC2", SelectorKind::Max}},
                                   false);
}

/// cow2 plus the split-parallel heater (TC at 4 C against TC3 at 5 C).
inline ControlGraph build_cow3a(const std::vector<TuningRow>& rows) {
    auto g = detail::build_cow_chain(rows,
                                     {{"TC1", SelectorKind::Max},
                                      {"TC3", SelectorKind::Min},
                                      {"CC2", SelectorKind::Max}},
                                     true);
    SplitParallelPair{"TC", "TC3", 1.0}.validate(g);
    return g;
}

/// Full scheme: adds the 0 C floor and the 3000 ppm ceiling, highest
/// priority (CO2 at 3000 ppm) at the end of the sequence.
inline ControlGraph build_cow3(const std::vector<TuningRow>& rows) {
    auto g = detail::build_cow_chain(rows,
                                     {{"TC1", SelectorKind::Max},
                                      {"TC3", SelectorKind::Min},
                                      {"CC2", SelectorKind::Max},
                                      {"TC2", SelectorKind::Min},
                                      {"CC1", SelectorKind::Max}},
                                     true);
    SplitParallelPair{"TC", "TC3", 1.0}.validate(g);
    return g;
}

/// Warm-start every controller of a barn graph at the given operating
/// point so a simulation starting there is bumpless.
inline void warm_start_cow(ControlGraph& g, double c_ppm, double t, double u1,
                           double u2) {
    warm_start_all(g, {{"T", t}, {"c", c_ppm}}, {{"u1", u1}, {"u2", u2}});
}

/// Recover the analytic priority structure from a built barn graph: the
/// fan chain in selector order plus the heater loop, as needed by
/// solve_active_set.
inline BarnStructure barn_structure_from_graph(const ControlGraph& g) {
    BarnStructure st;
    bool have_u0 = false;
    for (const auto& sel : g.selectors()) {
        if (g.mv_of_selector_chain(sel.label) != "u1")
            continue;
        for (const auto& in : sel.inputs) {
            if (g.has_controller(in)) {
                const auto& c = g.controller(in);
                const auto& cv = g.measurement_bindings().at(in);
                st.fan_chain.push_back({in, sel.kind,
                                        cv == "c" ? FanChainEntry::Target::Co2
                                                  : FanChainEntry::Target::Temp,
                                        c.setpoint(), c.kc(),
                                        c.tau_t() / c.tau_i()});
            } else if (auto v = g.constant_value(in); v && !have_u0) {
                st.u0 = *v;
                have_u0 = true;
            }
        }
    }
    for (const auto& [name, c] : g.controllers()) {
        if (g.mv_of(name) != "u2")
            continue;
        st.heater_label = name;
        st.heater_sp = c.setpoint();
        st.heater_kc = c.kc();
        st.heater_taut_over_taui = c.tau_t() / c.tau_i();
    }
    return st;
}

/// Map a simulated (winner, u1, u2) triple onto active-pair labels
/// comparable with solve_active_set.
inline std::pair<std::string, std::string>
barn_active_pair(const ControlGraph& g, const std::string& winner_u1, double u1,
                 double u2, double u0 = 50.0) {
    std::string a;
    if (!g.has_controller(winner_u1)) {
        a = "u1=" + std::to_string(static_cast<int>(std::lround(u0)));
        if (u1 >= 99.5) a = "u1=100";
    } else {
        const auto& c = g.controller(winner_u1);
        const auto& cv = g.measurement_bindings().at(winner_u1);
        double sp = c.setpoint();
        std::string v = std::to_string(sp);
        v.erase(v.find_last_not_of('0') + 1);
        if (!v.empty() && v.back() == '.') v.pop_back();
        a = (cv == "c" ? "c=" : "T=") + v;
    }
    std::string b = u2 <= 0.5    ? "u2=0"
                    : u2 >= 99.5 ? "u2=100"
                                 : "T=4";
    return {a, b};
}

} // namespace arc
