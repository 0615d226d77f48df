#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cow.hpp"
#include "graph.hpp"
#include "plants.hpp"
#include "sim.hpp"

namespace arc {

/// Error with a position in a configuration file.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& file, int line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          line_no(line) {}
    int line_no;
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        if (tok[0] == '#')
            break;
        out.push_back(tok);
    }
    return out;
}

inline double to_number(const std::string& file, int line, const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError(file, line, "expected a number, got '" + s + "'");
    }
    if (pos != s.size())
        throw ConfigError(file, line, "expected a number, got '" + s + "'");
    return v;
}

} // namespace detail

/// A declarative closed-loop scenario: plant selection and parameter
/// overrides, the controller/selector network, disturbance profiles,
/// delays, and integration settings.
struct Scenario {
    std::string name;
    std::string plant_kind; // "barn" or "separator"
    std::map<std::string, double> param_overrides;
    ControlGraph graph;
    RunConfig run;
    bool init_steady = false; // barn: start from the analytic active set
    std::map<std::string, double> init_state; // channel -> value
    std::map<std::string, double> init_mv;    // mv -> value
    std::vector<std::string> outputs;         // csv channels; empty = all
};

/// Parse the scenario text format. One directive per line:
///   scenario NAME / plant KIND / param NAME VALUE / dt V / t_end V /
///   log_interval V / integrator euler|rk4 /
///   controller NAME cv CH sp V kc V taui V [taut V] [umin V] [umax V]
///     [tracking on|off] /
///   external NAME / chain MV KIND INPUT... (u0 VALUE adds a constant) /
///   mv MV NODE / disturbance NAME staircase SEG V... /
///   disturbance NAME piecewise T V [T V ...] / delay CH SECONDS /
///   init steady | init state CH V ... | init mv MV V ... / output CH...
inline Scenario parse_scenario(std::istream& in, const std::string& filename) {
    Scenario sc;
    sc.run.dt = 1.0;
    sc.run.t_end = 0.0;
    std::map<std::string, int> chain_count; // selectors emitted per MV
    std::map<std::string, std::string> chain_head;
    std::vector<std::pair<std::string, std::string>> mv_binds;
    int line_no = 0;
    std::string line;
    int const_count = 0;

    while (std::getline(in, line)) {
        ++line_no;
        auto tok = detail::tokenize(line);
        if (tok.empty())
            continue;
        auto num = [&](const std::string& s) {
            return detail::to_number(filename, line_no, s);
        };
        auto need = [&](std::size_t n, const std::string& usage) {
            if (tok.size() < n)
                throw ConfigError(filename, line_no, "usage: " + usage);
        };
        const std::string& kw = tok[0];

        if (kw == "scenario") {
            need(2, "scenario NAME");
            sc.name = tok[1];
        } else if (kw == "plant") {
            need(2, "plant barn|separator");
            if (tok[1] != "barn" && tok[1] != "separator")
                throw ConfigError(filename, line_no,
                                  "unknown plant '" + tok[1] + "'");
            sc.plant_kind = tok[1];
        } else if (kw == "param") {
            need(3, "param NAME VALUE");
            sc.param_overrides[tok[1]] = num(tok[2]);
        } else if (kw == "dt") {
            need(2, "dt SECONDS");
            sc.run.dt = num(tok[1]);
        } else if (kw == "t_end") {
            need(2, "t_end SECONDS");
            sc.run.t_end = num(tok[1]);
        } else if (kw == "log_interval") {
            need(2, "log_interval SECONDS");
            sc.run.log_interval = num(tok[1]);
        } else if (kw == "stats_window") {
            need(2, "stats_window SECONDS");
            sc.run.stats_window = num(tok[1]);
        } else if (kw == "integrator") {
            need(2, "integrator euler|rk4");
            if (tok[1] == "rk4")
                sc.run.rk4 = true;
            else if (tok[1] != "euler")
                throw ConfigError(filename, line_no,
                                  "unknown integrator '" + tok[1] + "'");
        } else if (kw == "controller") {
            need(2, "controller NAME key value ...");
            std::map<std::string, std::string> kv;
            for (std::size_t i = 2; i + 1 < tok.size(); i += 2)
                kv[tok[i]] = tok[i + 1];
            if ((tok.size() - 2) % 2 != 0)
                throw ConfigError(filename, line_no,
                                  "controller: dangling key '" + tok.back() + "'");
            for (const char* req : {"cv", "sp", "kc", "taui"})
                if (!kv.count(req))
                    throw ConfigError(filename, line_no,
                                      std::string("controller: missing '") + req +
                                          "'");
            double taut = kv.count("taut") ? num(kv["taut"]) : -1.0;
            double umin = kv.count("umin") ? num(kv["umin"]) : 0.0;
            double umax = kv.count("umax") ? num(kv["umax"]) : 100.0;
            PiController c(tok[1], num(kv["kc"]), num(kv["taui"]), num(kv["sp"]),
                           taut, umin, umax);
            if (kv.count("tracking")) {
                if (kv["tracking"] == "off")
                    c.set_tracking_enabled(false);
                else if (kv["tracking"] != "on")
                    throw ConfigError(filename, line_no, "tracking on|off");
            }
            try {
                sc.graph.add_controller(std::move(c));
                sc.graph.bind_measurement(tok[1], kv["cv"]);
            } catch (const std::exception& e) {
                throw ConfigError(filename, line_no, e.what());
            }
        } else if (kw == "external") {
            need(2, "external NAME");
            sc.graph.add_external(tok[1]);
        } else if (kw == "chain") {
            need(4, "chain MV min|max|mid INPUT...");
            const std::string& mv = tok[1];
            SelectorKind kind;
            if (tok[2] == "min") kind = SelectorKind::Min;
            else if (tok[2] == "max") kind = SelectorKind::Max;
            else if (tok[2] == "mid") kind = SelectorKind::Mid;
            else
                throw ConfigError(filename, line_no,
                                  "selector kind must be min, max or mid");
            std::vector<std::string> inputs;
            if (chain_head.count(mv))
                inputs.push_back(chain_head[mv]); // previous stage feeds in
            for (std::size_t i = 3; i < tok.size(); ++i) {
                if (tok[i] == "u0") {
                    if (i + 1 >= tok.size())
                        throw ConfigError(filename, line_no, "u0 needs a value");
                    std::string cname = "u0";
                    if (const_count++ > 0)
                        cname += "_" + std::to_string(const_count);
                    sc.graph.add_constant(cname, num(tok[i + 1]));
                    inputs.push_back(cname);
                    ++i;
                } else {
                    inputs.push_back(tok[i]);
                }
            }
            std::string label =
                mv + "_sel" + std::to_string(++chain_count[mv]);
            try {
                sc.graph.add_selector(label, kind, inputs);
            } catch (const std::exception& e) {
                throw ConfigError(filename, line_no, e.what());
            }
            chain_head[mv] = label;
        } else if (kw == "mv") {
            need(3, "mv NAME NODE");
            mv_binds.emplace_back(tok[1], tok[2]);
        } else if (kw == "disturbance") {
            need(4, "disturbance NAME staircase|piecewise ...");
            PiecewiseProfile prof;
            if (tok[2] == "staircase") {
                need(5, "disturbance NAME staircase SEGMENT LEVEL...");
                std::vector<double> levels;
                for (std::size_t i = 4; i < tok.size(); ++i)
                    levels.push_back(num(tok[i]));
                prof = staircase_profile(levels, num(tok[3]));
            } else if (tok[2] == "piecewise") {
                if ((tok.size() - 3) % 2 != 0)
                    throw ConfigError(filename, line_no,
                                      "piecewise needs T V pairs");
                for (std::size_t i = 3; i < tok.size(); i += 2) {
                    prof.breakpoints.push_back(num(tok[i]));
                    prof.values.push_back(num(tok[i + 1]));
                }
            } else {
                throw ConfigError(filename, line_no,
                                  "profile kind must be staircase or piecewise");
            }
            try {
                prof.validate();
            } catch (const std::exception& e) {
                throw ConfigError(filename, line_no, e.what());
            }
            sc.run.disturbances[tok[1]] = std::move(prof);
        } else if (kw == "delay") {
            need(3, "delay CHANNEL SECONDS");
            sc.run.delays[tok[1]] = num(tok[2]);
        } else if (kw == "init") {
            need(2, "init steady | init state ... | init mv ...");
            if (tok[1] == "steady") {
                sc.init_steady = true;
            } else if (tok[1] == "state" || tok[1] == "mv") {
                auto& dst = tok[1] == "state" ? sc.init_state : sc.init_mv;
                if ((tok.size() - 2) % 2 != 0)
                    throw ConfigError(filename, line_no, "init needs NAME V pairs");
                for (std::size_t i = 2; i < tok.size(); i += 2)
                    dst[tok[i]] = num(tok[i + 1]);
            } else {
                throw ConfigError(filename, line_no,
                                  "init steady | init state | init mv");
            }
        } else if (kw == "output") {
            for (std::size_t i = 1; i < tok.size(); ++i)
                sc.outputs.push_back(tok[i]);
        } else {
            throw ConfigError(filename, line_no, "unknown directive '" + kw + "'");
        }
    }

    if (sc.plant_kind.empty())
        throw ConfigError(filename, line_no, "missing 'plant' directive");
    // bare controller -> MV bindings may appear before the chain lines
    for (const auto& [mv, node] : mv_binds)
        sc.graph.bind_mv(mv, node);
    for (const auto& [mv, head] : chain_head)
        if (std::none_of(mv_binds.begin(), mv_binds.end(),
                         [&](const auto& b) { return b.first == mv; }))
            sc.graph.bind_mv(mv, head);
    try {
        sc.graph.finalize();
    } catch (const std::exception& e) {
        throw ConfigError(filename, line_no, e.what());
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open scenario file " + path);
    return parse_scenario(f, path);
}

inline BarnParams barn_params_from(const std::map<std::string, double>& kv) {
    BarnParams p;
    for (const auto& [k, v] : kv) {
        if (k == "volume") p.volume = v;
        else if (k == "n_cows") p.n_cows = v;
        else if (k == "g_co2") p.g_co2 = v;
        else if (k == "q_cow") p.q_cow = v;
        else if (k == "q_max") p.q_max = v;
        else if (k == "q_min") p.q_min = v;
        else if (k == "q_heat_max") p.q_heat_max = v;
        else if (k == "ua") p.ua = v;
        else if (k == "c_out") p.c_out_ppm = v;
        else if (k == "rho") p.rho = v;
        else if (k == "cp") p.cp = v;
        else throw std::runtime_error("unknown barn parameter '" + k + "'");
    }
    return p;
}

inline SeparatorParams separator_params_from(const std::map<std::string, double>& kv) {
    SeparatorParams p;
    for (const auto& [k, v] : kv) {
        if (k == "p_res") p.p_res = v;
        else if (k == "r_well") p.r_well = v;
        else if (k == "cv_choke") p.cv_choke = v;
        else if (k == "gas_fraction") p.gas_fraction = v;
        else if (k == "v_gas") p.v_gas = v;
        else if (k == "area") p.area = v;
        else if (k == "k_comp") p.k_comp = v;
        else if (k == "cv_liq") p.cv_liq = v;
        else if (k == "p_downstream") p.p_downstream = v;
        else if (k == "p_min_well") p.p_min_well = v;
        else if (k == "p_sp") p.p_sp = v;
        else if (k == "delta") p.delta = v;
        else throw std::runtime_error("unknown separator parameter '" + k + "'");
    }
    return p;
}

struct ScenarioOutcome {
    RunResult result;
    std::optional<BarnParams> barn_params;
    std::optional<SeparatorParams> separator_params;
};

/// Build the plant, warm-start the controllers and run the scenario.
inline ScenarioOutcome run_scenario(Scenario sc) {
    ScenarioOutcome out;
    auto dist_at0 = [&](const std::string& name,
                        double fallback) {
        auto it = sc.run.disturbances.find(name);
        return it == sc.run.disturbances.end() ? fallback : it->second.at(0.0);
    };

    if (sc.plant_kind == "barn") {
        BarnParams p = barn_params_from(sc.param_overrides);
        out.barn_params = p;
        BarnState s0;
        std::map<std::string, double> mv0 = {{"u1", 50.0}, {"u2", 0.0}};
        if (sc.init_steady) {
            auto st = barn_structure_from_graph(sc.graph);
            auto sol = solve_active_set(
                dist_at0("T_out", 0.0), p, st,
                sc.run.disturbances.count("n_cows")
                    ? std::optional<double>(dist_at0("n_cows", p.n_cows))
                    : std::nullopt);
            if (!sol)
                throw std::runtime_error(
                    "scenario " + sc.name +
                    ": no feasible steady state for init steady");
            s0 = BarnState::from_ppm(sol->c_ppm, sol->t);
            mv0 = {{"u1", sol->u1}, {"u2", sol->u2}};
        } else {
            if (sc.init_state.count("c")) s0.c = sc.init_state.at("c") * 1e-6;
            if (sc.init_state.count("T")) s0.t = sc.init_state.at("T");
            for (const auto& [k, v] : sc.init_mv) mv0[k] = v;
        }
        warm_start_all(sc.graph, {{"T", s0.t}, {"c", s0.c_ppm()}}, mv0);
        BarnPlant plant(p, s0);
        out.result = run(plant, sc.graph, sc.run);
    } else if (sc.plant_kind == "separator") {
        SeparatorParams p = separator_params_from(sc.param_overrides);
        out.separator_params = p;
        SeparatorState s0 = nominal_separator_state();
        SeparatorInputs in0 = nominal_separator_inputs();
        if (sc.init_state.count("p_sep")) s0.p_sep = sc.init_state.at("p_sep");
        if (sc.init_state.count("level")) s0.level = sc.init_state.at("level");
        if (sc.init_mv.count("choke")) in0.z_choke = sc.init_mv.at("choke");
        if (sc.init_mv.count("comp")) in0.comp_speed = sc.init_mv.at("comp");
        if (sc.init_mv.count("lv")) in0.z_liq = sc.init_mv.at("lv");
        SeparatorPlant plant(p, s0);
        plant.set_initial_mvs(in0);
        auto y0 = plant.outputs();
        warm_start_all(sc.graph, y0,
                       {{"choke", in0.z_choke},
                        {"comp", in0.comp_speed},
                        {"lv", in0.z_liq}});
        out.result = run(plant, sc.graph, sc.run);
    } else {
        throw std::runtime_error("unknown plant kind '" + sc.plant_kind + "'");
    }
    return out;
}

} // namespace arc
