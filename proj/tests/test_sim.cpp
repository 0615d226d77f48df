#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "arc/cow.hpp"
#include "arc/plants.hpp"
#include "arc/sim.hpp"

using namespace arc;
using Catch::Approx;

TEST_CASE("delay line reproduces the input shifted by the delay") {
    DelayLine d(5.0, 1.0, -1.0);
    for (int k = 0; k < 5; ++k)
        CHECK(d.step(k) == -1.0); // warm-up returns the fill
    for (int k = 5; k < 50; ++k)
        CHECK(d.step(k) == Approx(k - 5));

    DelayLine none(0.0, 1.0, 0.0);
    CHECK(none.step(42.0) == 42.0);

    CHECK_THROWS_AS(DelayLine(2.5, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("piecewise profile lookup") {
    PiecewiseProfile p{{0.0, 4000.0}, {0.0, -20.0}};
    p.validate();
    CHECK(p.at(0.0) == 0.0);
    CHECK(p.at(3999.0) == 0.0);
    CHECK(p.at(4000.0) == -20.0);
    CHECK(p.at(1e9) == -20.0);

    CHECK_THROWS_AS((PiecewiseProfile{{0.0, 10.0, 10.0}, {1, 2, 3}}.validate()),
                    std::invalid_argument);
}

TEST_CASE("staircase profile") {
    auto p = staircase_profile({1.0}, 4000.0);
    CHECK(p.at(0.0) == 1.0);
    CHECK(p.at(1e6) == 1.0); // single level -> constant

    auto q = staircase_profile({0.0, -20.0}, 4000.0);
    CHECK(q.breakpoints == std::vector<double>{0.0, 4000.0});

    auto cow = staircase_profile(default_cow_staircase());
    CHECK(cow.values.size() == 18);
    CHECK(cow.at(6 * 4000.0) == -40.0);
    CHECK_THROWS_AS(staircase_profile({}), std::invalid_argument);
}

namespace {

ControlGraph make_cow3_graph() {
    return build_cow3(tuning_table(BarnParams{}));
}

RunConfig nominal_cfg(double t_end) {
    RunConfig cfg;
    cfg.t_end = t_end;
    cfg.disturbances["T_out"] = PiecewiseProfile::constant(0.0);
    return cfg;
}

} // namespace

TEST_CASE("a warm-started barn at the nominal point does not move") {
    BarnParams p;
    auto sol = solve_active_set(0.0, p, cow3_structure(p));
    REQUIRE(sol.has_value());
    auto g = make_cow3_graph();
    warm_start_cow(g, sol->c_ppm, sol->t, sol->u1, sol->u2);
    BarnPlant plant(p, BarnState::from_ppm(sol->c_ppm, sol->t));
    auto res = run(plant, g, nominal_cfg(2000.0));
    for (double v : res.channel("T"))
        CHECK(v == Approx(sol->t).margin(1e-6));
    for (double v : res.channel("c"))
        CHECK(v == Approx(sol->c_ppm).margin(1e-4));
}

TEST_CASE("with no cows and the heater off, the barn relaxes to ambient") {
    BarnParams p;
    BarnPlant plant(p, BarnState::from_ppm(800.0, 10.0));
    std::map<std::string, double> mv{{"u1", 50.0}, {"u2", 0.0}};
    std::map<std::string, double> dist{{"T_out", -3.0}, {"n_cows", 0.0}};
    for (int k = 0; k < 6000; ++k)
        plant.advance(mv, dist, 1.0, false);
    CHECK(plant.state().t == Approx(-3.0).margin(1e-3));
    CHECK(plant.state().c_ppm() == Approx(420.0).margin(0.5));
}

TEST_CASE("one Euler step advances CO2 by the derivative times dt") {
    BarnParams p;
    BarnPlant plant(p, BarnState::from_ppm(420.0, 0.0));
    plant.advance({{"u1", 50.0}, {"u2", 0.0}}, {{"T_out", 0.0}}, 1.0, false);
    CHECK(plant.state().c_ppm() - 420.0 == Approx(4e-3 / 3000.0 * 1e6));
}

TEST_CASE("t_end = 0 yields only the initial sample") {
    BarnParams p;
    auto g = make_cow3_graph();
    warm_start_cow(g, 950.0, 7.2, 50.0, 0.0);
    BarnPlant plant(p, BarnState::from_ppm(950.0, 7.2));
    auto res = run(plant, g, nominal_cfg(0.0));
    CHECK(res.time.size() == 1);
    CHECK(res.time[0] == 0.0);
}

TEST_CASE("runs are bit-identical") {
    BarnParams p;
    auto make_run = [&] {
        auto g = make_cow3_graph();
        auto sol = solve_active_set(0.0, p, cow3_structure(p));
        warm_start_cow(g, sol->c_ppm, sol->t, sol->u1, sol->u2);
        BarnPlant plant(p, BarnState::from_ppm(sol->c_ppm, sol->t));
        RunConfig cfg;
        cfg.t_end = 9000.0;
        cfg.disturbances["T_out"] = staircase_profile({0.0, -20.0, -5.0}, 3000.0);
        return run(plant, g, cfg);
    };
    auto a = make_run();
    auto b = make_run();
    REQUIRE(a.time == b.time);
    for (std::size_t i = 0; i < a.columns.size(); ++i)
        REQUIRE(a.columns[i] == b.columns[i]);
    REQUIRE(a.events.size() == b.events.size());
}

TEST_CASE("delayed measurements feed the controllers late") {
    BarnParams p;
    auto g = make_cow3_graph();
    auto sol = solve_active_set(0.0, p, cow3_structure(p));
    warm_start_cow(g, sol->c_ppm, sol->t, sol->u1, sol->u2);
    BarnPlant plant(p, BarnState::from_ppm(sol->c_ppm, sol->t));
    RunConfig cfg;
    cfg.t_end = 4000.0;
    cfg.disturbances["T_out"] = PiecewiseProfile{{0.0, 100.0}, {0.0, -10.0}};
    cfg.delays = {{"T", 60.0}, {"c", 60.0}};
    auto res = run(plant, g, cfg);
    // still settles near the analytic point for T_out = -10
    auto target = solve_active_set(-10.0, p, cow3_structure(p));
    CHECK(res.channel("T").back() == Approx(target->t).margin(0.1));
}

TEST_CASE("segment statistics cover the terminal window") {
    BarnParams p;
    auto g = make_cow3_graph();
    auto sol = solve_active_set(0.0, p, cow3_structure(p));
    warm_start_cow(g, sol->c_ppm, sol->t, sol->u1, sol->u2);
    BarnPlant plant(p, BarnState::from_ppm(sol->c_ppm, sol->t));
    RunConfig cfg;
    cfg.t_end = 8000.0;
    cfg.disturbances["T_out"] = staircase_profile({0.0, -5.0}, 4000.0);
    auto res = run(plant, g, cfg);
    REQUIRE(res.segments.size() == 2);
    CHECK(res.segments[0].t_begin == 0.0);
    CHECK(res.segments[0].t_end == 4000.0);
    CHECK(res.segments[1].disturbance.at("T_out") == -5.0);
    auto target = solve_active_set(-5.0, p, cow3_structure(p));
    CHECK(res.segments[1].final_value.at("T") == Approx(target->t).margin(0.1));
    CHECK(res.segments[1].winner.at("u1") == "CC2");
}

TEST_CASE("events are strictly time-ordered and start with the initial winner") {
    BarnParams p;
    auto g = make_cow3_graph();
    auto sol = solve_active_set(0.0, p, cow3_structure(p));
    warm_start_cow(g, sol->c_ppm, sol->t, sol->u1, sol->u2);
    BarnPlant plant(p, BarnState::from_ppm(sol->c_ppm, sol->t));
    RunConfig cfg;
    cfg.t_end = 12000.0;
    cfg.disturbances["T_out"] = staircase_profile({0.0, -20.0, 0.0}, 4000.0);
    auto res = run(plant, g, cfg);
    REQUIRE(res.events.size() >= 2);
    CHECK(res.events[0].t == 0.0);
    CHECK(res.events[0].from.empty());
    double last = -1.0;
    for (const auto& ev : res.events) {
        CHECK(ev.t >= last);
        last = ev.t;
    }
}

TEST_CASE("halving dt barely moves the terminal values") {
    BarnParams p;
    auto terminal = [&](double dt) {
        auto g = make_cow3_graph();
        auto sol = solve_active_set(0.0, p, cow3_structure(p));
        warm_start_cow(g, sol->c_ppm, sol->t, sol->u1, sol->u2);
        BarnPlant plant(p, BarnState::from_ppm(sol->c_ppm, sol->t));
        RunConfig cfg;
        cfg.dt = dt;
        cfg.t_end = 12000.0;
        cfg.disturbances["T_out"] = staircase_profile({0.0, -20.0, -5.0}, 4000.0);
        auto res = run(plant, g, cfg);
        return std::pair{res.channel("T").back(), res.channel("c").back()};
    };
    auto [t1, c1] = terminal(1.0);
    auto [t2, c2] = terminal(0.5);
    CHECK(std::fabs(t1 - t2) / std::max(1.0, std::fabs(t2)) < 1e-3);
    CHECK(std::fabs(c1 - c2) / c2 < 1e-3);
}

TEST_CASE("rk4 and euler agree on the barn trajectory") {
    BarnParams p;
    auto terminal = [&](bool rk4) {
        auto g = make_cow3_graph();
        auto sol = solve_active_set(0.0, p, cow3_structure(p));
        warm_start_cow(g, sol->c_ppm, sol->t, sol->u1, sol->u2);
        BarnPlant plant(p, BarnState::from_ppm(sol->c_ppm, sol->t));
        RunConfig cfg;
        cfg.t_end = 6000.0;
        cfg.rk4 = rk4;
        cfg.disturbances["T_out"] = staircase_profile({0.0, -10.0}, 3000.0);
        return run(plant, g, cfg).channel("T").back();
    };
    CHECK(terminal(false) == Approx(terminal(true)).margin(0.01));
}

TEST_CASE("winner changes do not inject bumps beyond the candidate crossing") {
    BarnParams p;
    auto g = make_cow3_graph();
    auto sol = solve_active_set(0.0, p, cow3_structure(p));
    warm_start_cow(g, sol->c_ppm, sol->t, sol->u1, sol->u2);
    BarnPlant plant(p, BarnState::from_ppm(sol->c_ppm, sol->t));
    RunConfig cfg;
    cfg.t_end = 72000.0;
    cfg.log_interval = 1.0;
    cfg.record_candidates = true;
    cfg.disturbances["T_out"] = staircase_profile(default_cow_staircase());
    auto res = run(plant, g, cfg);

    auto cand_at = [&](const std::string& who, std::size_t i) {
        if (who == "u0")
            return 50.0;
        return res.channel("cand:" + who)[i];
    };
    const auto& u1 = res.channel("u1");
    int checked = 0;
    for (const auto& ev : res.events) {
        if (ev.mv != "u1" || ev.from.empty())
            continue;
        std::size_t i = static_cast<std::size_t>(ev.t); // log interval is 1 s
        REQUIRE(res.time[i] == ev.t);
        REQUIRE(i > 0);
        double mv_step = std::fabs(u1[i] - u1[i - 1]);
        double crossing = std::fabs(cand_at(ev.to, i) - cand_at(ev.from, i));
        double slew = std::fabs(cand_at(ev.from, i) - cand_at(ev.from, i - 1));
        CHECK(mv_step <= crossing + slew + 1e-9);
        ++checked;
    }
    CHECK(checked >= 6); // the staircase exercises several takeovers
}

TEST_CASE("non-finite plant state aborts with a diagnostic") {
    BarnParams p;
    auto g = make_cow3_graph();
    warm_start_cow(g, 950.0, 7.2, 50.0, 0.0);
    BarnPlant plant(p, BarnState{std::nan(""), 7.2});
    RunConfig cfg = nominal_cfg(100.0);
    CHECK_THROWS_AS(run(plant, g, cfg), std::runtime_error);
}
