#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "arc/barn.hpp"
#include "arc/cow.hpp"
#include "arc/graph.hpp"

using arc::ControlGraph;
using arc::PiController;
using arc::SelectorKind;
using Catch::Approx;

TEST_CASE("single controller with no selectors drives its MV directly") {
    ControlGraph g;
    g.add_controller(PiController("pc", -10.0, 350.0, 20.0));
    g.bind_measurement("pc", "T");
    g.bind_mv("u", "pc");
    g.finalize();

    g.controller("pc").set_integral(50.0);
    auto r = g.evaluate({{"T", 21.0}}, 1.0);
    CHECK(r.mv_values.at("u") == Approx(60.0));
    CHECK(r.winners.at("u") == "pc");
}

TEST_CASE("construction rejects bad wiring") {
    SECTION("forward / unknown selector input") {
        ControlGraph g;
        g.add_constant("u0", 50.0);
        CHECK_THROWS_AS(g.add_selector("s1", SelectorKind::Min, {"u0", "later"}),
                        std::invalid_argument);
    }
    SECTION("controller feeding nothing") {
        ControlGraph g;
        g.add_controller(PiController("pc", -1.0, 100.0, 0.0));
        g.bind_measurement("pc", "y");
        CHECK_THROWS_AS(g.finalize(), std::invalid_argument);
    }
    SECTION("node feeding two chains") {
        ControlGraph g;
        g.add_constant("u0", 50.0);
        g.add_controller(PiController("pc", -1.0, 100.0, 0.0));
        g.bind_measurement("pc", "y");
        g.add_selector("s1", SelectorKind::Min, {"u0", "pc"});
        g.add_selector("s2", SelectorKind::Max, {"u0", "pc"});
        g.bind_mv("a", "s1");
        g.bind_mv("b", "s2");
        CHECK_THROWS_AS(g.finalize(), std::invalid_argument);
    }
    SECTION("duplicate names and double MV binding") {
        ControlGraph g;
        g.add_constant("u0", 50.0);
        CHECK_THROWS_AS(g.add_constant("u0", 60.0), std::invalid_argument);
        g.add_controller(PiController("pc", -1.0, 100.0, 0.0));
        g.bind_mv("u", "pc");
        CHECK_THROWS_AS(g.bind_mv("u", "u0"), std::invalid_argument);
    }
    SECTION("unresolved channel at evaluate") {
        ControlGraph g;
        g.add_controller(PiController("pc", -1.0, 100.0, 0.0));
        g.bind_measurement("pc", "y");
        g.bind_mv("u", "pc");
        g.finalize();
        CHECK_THROWS_AS(g.evaluate({{"z", 1.0}}, 1.0), std::invalid_argument);
    }
}

TEST_CASE("cow2 chain holds the desired 50% at the nominal point") {
    auto rows = arc::tuning_table(arc::BarnParams{});
    auto g = arc::build_cow2(rows);
    arc::warm_start_cow(g, 950.0, 7.2, 50.0, 0.0);

    auto r = g.evaluate({{"T", 7.2}, {"c", 950.0}}, 1.0);
    CHECK(r.mv_values.at("u1") == Approx(50.0));
    CHECK(r.winners.at("u1") == "u0");
}

TEST_CASE("cow3 chain at the coldest steady point selects the CO2 ceiling") {
    arc::BarnParams p;
    auto st = arc::cow3_structure(p);
    auto sol = arc::solve_active_set(-40.0, p, st);
    REQUIRE(sol.has_value());

    auto g = arc::build_cow3(arc::tuning_table(p));
    arc::warm_start_cow(g, sol->c_ppm, sol->t, sol->u1, sol->u2);
    auto r = g.evaluate({{"T", sol->t}, {"c", sol->c_ppm}}, 1.0);
    CHECK(r.mv_values.at("u1") == Approx(9.7).margin(0.1));
    CHECK(r.winners.at("u1") == "CC1");
    CHECK(r.mv_values.at("u2") == Approx(100.0));
}

TEST_CASE("evaluate is deterministic") {
    auto rows = arc::tuning_table(arc::BarnParams{});
    auto g1 = arc::build_cow3(rows);
    auto g2 = arc::build_cow3(rows);
    arc::warm_start_cow(g1, 950.0, 7.2, 50.0, 0.0);
    arc::warm_start_cow(g2, 950.0, 7.2, 50.0, 0.0);

    std::map<std::string, double> meas{{"T", 3.0}, {"c", 1400.0}};
    for (int k = 0; k < 50; ++k) {
        auto a = g1.evaluate(meas, 1.0);
        auto b = g2.evaluate(meas, 1.0);
        REQUIRE(a.mv_values == b.mv_values);
        REQUIRE(a.winners == b.winners);
        meas["T"] += 0.01;
    }
}

TEST_CASE("split-parallel validation") {
    auto rows = arc::tuning_table(arc::BarnParams{});
    auto g = arc::build_cow3(rows);
    CHECK_NOTHROW(arc::SplitParallelPair({"TC", "TC3", 1.0}).validate(g));
    CHECK_THROWS_AS(arc::SplitParallelPair({"TC", "TC3", 2.0}).validate(g),
                    std::invalid_argument);
    // both controllers on the same MV is rejected
    CHECK_THROWS_AS(arc::SplitParallelPair({"TC3", "TC1", 15.0}).validate(g),
                    std::invalid_argument);
}
