// arcsim: command-line front end for the ARC simulation toolkit.
//
//   arcsim simulate SCENARIO... --out DIR     closed-loop runs -> CSV + summary
//   arcsim steady-state --t-out LIST          analytic barn operating points
//   arcsim tune                                PI tuning table
//   arcsim linearize --u1 V --u2 V --t-out V   barn gains / time constants
//   arcsim check-topology FILE                 flowsheet rule report
//
// Exit codes: 0 ok, 1 rule or tolerance failure, 2 usage/IO error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "arc/cow.hpp"
#include "arc/csv.hpp"
#include "arc/rules.hpp"
#include "arc/scenario.hpp"
#include "arc/tuning.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    std::string format = "text"; // or "csv"
    double dt = -1.0;            // <0: keep the scenario's value
    double t_end = -1.0;
    std::string out_dir = ".";
    int jobs = 1;
};

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

std::string scenario_summary(const arc::Scenario& sc,
                             const arc::ScenarioOutcome& outcome) {
    std::ostringstream os;
    os << "scenario " << sc.name << " (" << sc.plant_kind << "), t_end "
       << sc.run.t_end << " s, dt " << sc.run.dt << " s\n";
    os << "events: " << outcome.result.events.size() << "\n";
    if (sc.plant_kind == "separator" && sc.graph.has_controller("PC_B")) {
        // Split-parallel overlap: PC_B holds the choke while PC_A is off its
        // compressor limit, i.e. both pressure controllers act at once.
        const auto& r = outcome.result;
        auto winners = r.winner_series("choke");
        const auto& comp = r.channel("comp");
        std::size_t overlap = 0;
        for (std::size_t i = 0; i < r.time.size(); ++i)
            if (winners[i] == "PC_B" && comp[i] < 99.9)
                ++overlap;
        os << "split-parallel overlap samples (PC_B active, compressor "
              "unsaturated): "
           << overlap << "\n";
    }
    os << "\n";
    const bool barn = sc.plant_kind == "barn";
    double u0 = 50.0;
    if (barn)
        u0 = arc::barn_structure_from_graph(sc.graph).u0;
    for (const auto& seg : outcome.result.segments) {
        os << "segment [" << seg.t_begin << ", " << seg.t_end << ")";
        for (const auto& [name, v] : seg.disturbance)
            os << " " << name << "=" << fmt(v);
        os << "\n  final:";
        for (const auto& [ch, v] : seg.final_value)
            os << " " << ch << "=" << fmt(v, 5);
        os << "\n  winners:";
        for (const auto& [mv, w] : seg.winner)
            os << " " << mv << "<-" << w;
        if (barn && seg.winner.count("u1")) {
            auto pair = arc::barn_active_pair(sc.graph, seg.winner.at("u1"),
                                              seg.final_value.at("u1"),
                                              seg.final_value.at("u2"), u0);
            os << "\n  active pair: {" << pair.first << ", " << pair.second
               << "}";
        }
        os << "\n";
    }
    return os.str();
}

int run_one_scenario(const std::string& path, const GlobalOpts& g) {
    arc::Scenario sc = arc::load_scenario(path);
    if (g.dt > 0)
        sc.run.dt = g.dt;
    if (g.t_end >= 0)
        sc.run.t_end = g.t_end;
    auto outcome = arc::run_scenario(sc);

    fs::create_directories(g.out_dir);
    const std::string base = (fs::path(g.out_dir) / sc.name).string();
    {
        std::ostringstream os;
        arc::write_trajectory_csv(os, outcome.result);
        arc::write_file(base + "_trajectory.csv", os.str());
    }
    {
        std::ostringstream os;
        arc::write_events_csv(os, outcome.result);
        arc::write_file(base + "_events.csv", os.str());
    }
    arc::write_file(base + "_summary.txt", scenario_summary(sc, outcome));
    std::cout << "wrote " << base << "_{trajectory,events}.csv and summary\n";
    return 0;
}

int cmd_simulate(const std::vector<std::string>& paths, const GlobalOpts& g) {
    for (const auto& p : paths)
        if (!fs::exists(p)) {
            std::cerr << "error: no such scenario file: " << p << "\n";
            return 2;
        }
    if (g.jobs <= 1 || paths.size() <= 1) {
        for (const auto& p : paths)
            run_one_scenario(p, g);
        return 0;
    }
    std::vector<std::future<int>> futs;
    for (const auto& p : paths)
        futs.push_back(std::async(std::launch::async,
                                  [&g, p] { return run_one_scenario(p, g); }));
    int rc = 0;
    for (auto& f : futs)
        rc = std::max(rc, f.get());
    return rc;
}

// ---------------------------------------------------------------------------
// steady-state
// ---------------------------------------------------------------------------

int cmd_steady_state(const std::vector<double>& t_outs, bool simulate,
                     const GlobalOpts& g) {
    arc::BarnParams p;
    auto st = arc::cow3_structure(p);
    const bool csv = g.format == "csv";
    if (csv)
        std::cout << "t_out,T,c_ppm,u1,u2,active_u1,active_u2,notes\n";
    else
        std::cout << std::left << std::setw(8) << "T_out" << std::setw(8) << "T"
                  << std::setw(8) << "c_ppm" << std::setw(8) << "u1"
                  << std::setw(8) << "u2" << "active pair\n";

    int rc = 0;
    for (double t_out : t_outs) {
        auto sol = arc::solve_active_set(t_out, p, st);
        if (!sol) {
            if (csv)
                std::cout << fmt(t_out) << ",,,,,,,infeasible\n";
            else
                std::cout << std::setw(8) << fmt(t_out)
                          << "no feasible active pair\n";
            rc = 1;
            continue;
        }
        std::string notes;
        for (const auto& r : sol->relaxed)
            notes += (notes.empty() ? "" : "; ") + r;
        if (csv) {
            std::cout << fmt(t_out) << "," << fmt(sol->t, 5) << ","
                      << fmt(sol->c_ppm, 6) << "," << fmt(sol->u1, 4) << ","
                      << fmt(sol->u2, 4) << "," << sol->active_u1 << ","
                      << sol->active_u2 << "," << notes << "\n";
        } else {
            std::cout << std::setw(8) << fmt(t_out) << std::setw(8)
                      << fmt(sol->t, 3) << std::setw(8) << fmt(sol->c_ppm, 4)
                      << std::setw(8) << fmt(sol->u1, 3) << std::setw(8)
                      << fmt(sol->u2, 3) << "{" << sol->active_u1 << ", "
                      << sol->active_u2 << "}";
            if (!notes.empty())
                std::cout << "   [" << notes << "]";
            std::cout << "\n";
        }

        if (simulate && sol) {
            auto graph = arc::build_cow3(arc::tuning_table(p));
            arc::warm_start_cow(graph, p.c_out_ppm + 100.0, t_out + 5.0, 50.0,
                                0.0);
            arc::BarnPlant plant(
                p, arc::BarnState::from_ppm(p.c_out_ppm + 100.0, t_out + 5.0));
            arc::RunConfig cfg;
            cfg.dt = g.dt > 0 ? g.dt : 1.0;
            cfg.t_end = g.t_end >= 0 ? g.t_end : 40000.0;
            cfg.disturbances["T_out"] =
                arc::PiecewiseProfile::constant(t_out);
            auto res = arc::run(plant, graph, cfg);
            double t_f = res.channel("T").back();
            double c_f = res.channel("c").back();
            double u1_f = res.channel("u1").back();
            double u2_f = res.channel("u2").back();
            bool ok = std::fabs(t_f - sol->t) <= 0.1 &&
                      std::fabs(c_f - sol->c_ppm) <= 5.0 &&
                      std::fabs(u1_f - sol->u1) <= 0.5 &&
                      std::fabs(u2_f - sol->u2) <= 1.0;
            std::cout << "  closed-loop: T=" << fmt(t_f, 4)
                      << " c=" << fmt(c_f, 5) << " u1=" << fmt(u1_f, 4)
                      << " u2=" << fmt(u2_f, 4)
                      << (ok ? "  (agrees)" : "  (MISMATCH)") << "\n";
            if (!ok)
                rc = 1;
        }
    }
    return rc;
}

// ---------------------------------------------------------------------------
// tune / linearize
// ---------------------------------------------------------------------------

int cmd_tune(double tc2_factor, double cc1_factor, const GlobalOpts& g) {
    auto rows = arc::tuning_table(arc::BarnParams{}, tc2_factor, cc1_factor);
    if (g.format == "csv") {
        std::cout << "name,mv,kc,tau_i_s,setpoint,cv\n";
        for (const auto& r : rows)
            std::cout << r.name << "," << r.mv << "," << fmt(r.kc) << ","
                      << fmt(r.tau_i_s) << "," << fmt(r.setpoint) << "," << r.cv
                      << "\n";
    } else {
        std::cout << std::left << std::setw(6) << "name" << std::setw(5) << "mv"
                  << std::setw(9) << "Kc" << std::setw(9) << "tauI"
                  << std::setw(10) << "setpoint" << "cv\n";
        for (const auto& r : rows)
            std::cout << std::setw(6) << r.name << std::setw(5) << r.mv
                      << std::setw(9) << fmt(r.kc) << std::setw(9)
                      << fmt(r.tau_i_s) << std::setw(10) << fmt(r.setpoint)
                      << r.cv << "\n";
    }
    return 0;
}

int cmd_linearize(double u1, double u2, double t_out, const GlobalOpts& g) {
    arc::BarnParams p;
    auto lp = arc::linearize_barn(u1, u2, t_out, p);
    if (g.format == "csv") {
        std::cout << "q,tau_c_co2,tau_t_temp,k_c_u1,k_t_u1,k_t_u2,"
                     "kprime_c_u1,kprime_t_u1,kprime_t_u2\n";
        std::cout << fmt(lp.q) << "," << fmt(lp.tau_c_co2) << ","
                  << fmt(lp.tau_t_temp) << "," << fmt(lp.k_c_u1) << ","
                  << fmt(lp.k_t_u1) << "," << fmt(lp.k_t_u2) << ","
                  << fmt(lp.kprime_c_u1()) << "," << fmt(lp.kprime_t_u1()) << ","
                  << fmt(lp.kprime_t_u2()) << "\n";
    } else {
        std::cout << "operating point u1=" << u1 << "% u2=" << u2
                  << "% T_out=" << t_out << " C  (q=" << fmt(lp.q, 4)
                  << " m3/s)\n"
                  << "  tau_c  = " << fmt(lp.tau_c_co2, 4) << " s\n"
                  << "  tau_T  = " << fmt(lp.tau_t_temp, 4) << " s\n"
                  << "  k_c,u1 = " << fmt(lp.k_c_u1, 4) << " ppm/%\n"
                  << "  k_T,u1 = " << fmt(lp.k_t_u1, 4) << " C/%\n"
                  << "  k_T,u2 = " << fmt(lp.k_t_u2, 4) << " C/%\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// check-topology
// ---------------------------------------------------------------------------

int cmd_check_topology(const std::string& path, bool allow_nonradiating,
                       const GlobalOpts& g) {
    auto parsed = arc::load_flowsheet(path);
    if (!parsed.ok()) {
        for (const auto& d : parsed.diagnostics)
            std::cerr << path << ":" << d.line << ":" << d.column << ": "
                      << d.message << "\n";
        return 2;
    }
    auto reports = arc::check_all(*parsed.spec);
    if (allow_nonradiating)
        arc::allow_nonradiating(reports);
    if (g.format == "csv") {
        std::cout << "rule,severity,locus,message\n";
        for (const auto& r : reports) {
            std::string locus;
            for (const auto& l : r.locus)
                locus += (locus.empty() ? "" : " ") + l;
            std::cout << to_string(r.rule) << "," << to_string(r.severity) << ","
                      << locus << ",\"" << r.message << "\"\n";
        }
    } else {
        std::cout << "flowsheet " << parsed.spec->name << " (" << path << ")\n";
        for (const auto& r : reports) {
            std::cout << "  " << to_string(r.rule) << "  "
                      << std::setw(11) << std::left << to_string(r.severity)
                      << r.message;
            if (!r.locus.empty()) {
                std::cout << "  [";
                for (std::size_t i = 0; i < r.locus.size(); ++i)
                    std::cout << (i ? " " : "") << r.locus[i];
                std::cout << "]";
            }
            std::cout << "\n";
        }
    }
    return arc::any_violation(reports) ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ARC simulation toolkit: PID/selector control structures, "
                 "barn and separator case studies"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOpts g;
    app.add_option("--format", g.format, "output format: text or csv")
        ->check(CLI::IsMember({"text", "csv"}));
    app.add_option("--dt", g.dt, "integration step override, s");
    app.add_option("--t-end", g.t_end, "simulation horizon override, s");
    app.add_option("--out", g.out_dir, "output directory for simulate");
    app.add_option("--jobs", g.jobs, "parallel scenario runs");

    std::vector<std::string> scenario_paths;
    auto* sim = app.add_subcommand("simulate", "run scenario files");
    sim->add_option("scenarios", scenario_paths, "scenario file(s)")->required();

    std::string t_out_list = "15,10,5,0,-2.5,-5,-10,-20,-30,-40";
    bool cross_check = false;
    auto* ss = app.add_subcommand("steady-state",
                                  "analytic barn operating points per T_out");
    ss->add_option("--t-out", t_out_list, "comma-separated outdoor temperatures");
    ss->add_flag("--simulate", cross_check,
                 "cross-check each point against a closed-loop run");

    double tc2_factor = 3.0, cc1_factor = 5.0;
    auto* tune = app.add_subcommand("tune", "print the PI tuning table");
    tune->add_option("--tc2-factor", tc2_factor,
                     "off-nominal scaling for the 0 C loop");
    tune->add_option("--cc1-factor", cc1_factor,
                     "off-nominal scaling for the 3000 ppm loop");

    double u1 = 50.0, u2 = 0.0, t_out = 0.0;
    auto* lin = app.add_subcommand("linearize", "barn gains and time constants");
    lin->add_option("--u1", u1, "fan speed, %");
    lin->add_option("--u2", u2, "heater, %");
    lin->add_option("--t-out", t_out, "outdoor temperature, C");

    std::string topo_path;
    bool c3_override = false;
    auto* topo = app.add_subcommand("check-topology",
                                    "validate a flowsheet description");
    topo->add_option("file", topo_path, "flowsheet file")->required();
    topo->add_flag("--allow-nonradiating", c3_override,
                   "downgrade radiation-rule violations to warnings");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(scenario_paths, g);
        if (ss->parsed()) {
            std::vector<double> touts;
            std::stringstream s(t_out_list);
            std::string item;
            while (std::getline(s, item, ','))
                touts.push_back(std::stod(item));
            return cmd_steady_state(touts, cross_check, g);
        }
        if (tune->parsed())
            return cmd_tune(tc2_factor, cc1_factor, g);
        if (lin->parsed())
            return cmd_linearize(u1, u2, t_out, g);
        if (topo->parsed())
            return cmd_check_topology(topo_path, c3_override, g);
    } catch (const arc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
